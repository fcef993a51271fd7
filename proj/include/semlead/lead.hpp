#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semlead/change.hpp"
#include "semlead/corpus.hpp"
#include "semlead/embed.hpp"

namespace semlead {

inline constexpr double kDefaultLeadEpsilon = 1e-6;

/// (u(w,t1,s1) . u(w,t2,s2)) / (u(w,t1,s2) . u(w,t2,s2)); empty when the
/// denominator's magnitude is at most `epsilon`. Requires a source-conditional
/// model (KindMismatch otherwise).
std::optional<double> lead_score(const EmbeddingModel& model, int s1, int s2, int w, int t1, int t2,
                                 double epsilon = kDefaultLeadEpsilon);

struct LeadOptions {
  double epsilon = kDefaultLeadEpsilon;
  /// Only score pairs where the leader used the word at t1 and the follower
  /// used it at both t1 and t2. A source without usage carries no residual,
  /// so its vector is the pooled one and says nothing about that source.
  bool require_usage = true;
};

struct LeadPair {
  int leader = 0;
  int follower = 0;
  double score = 0;
};

/// Every defined ordered pair at (t1, t1 + 1), in (leader, follower) order.
std::vector<LeadPair> lead_pairs(const EmbeddingModel& model, int w, int t1, const LeadOptions& options = {});

/// Highest-scoring ordered pair at (t1, t1 + 1); ties go to the smaller
/// (leader, follower). Empty when no pair is defined.
std::optional<LeadPair> max_lead_pair(const EmbeddingModel& model, int w, int t1, const LeadOptions& options = {});

enum class RandomizeMode { tokens, documents };
std::string_view to_string(RandomizeMode mode);
RandomizeMode parse_randomize_mode(std::string_view text);

/// Token mode pools every token of a bin and deals them back out to that
/// bin's documents in a uniformly random order; lengths, sources and bins are
/// untouched. Document mode permutes source labels among a bin's documents.
std::vector<Document> randomize_corpus(std::span<const Document> docs, int bins, std::uint64_t seed,
                                       RandomizeMode mode = RandomizeMode::tokens);

struct LeadTuple {
  int word = 0;
  int leader = 0;
  int follower = 0;
  int t1 = 0;
  int t2 = 0;
  auto operator<=>(const LeadTuple&) const = default;
};

enum class NullMode {
  warm,  // base and output copied from the real model; residuals retrained
  full,  // every table retrained from a fresh initialization
};
std::string_view to_string(NullMode mode);
NullMode parse_null_mode(std::string_view text);

/// What one replicate contributes to a tuple's null distribution.
enum class NullStatistic {
  tuple,     // lead score of the tuple's own (leader, follower) pair
  max_pair,  // highest lead score over all pairs at the tuple's (word, t1)
};
std::string_view to_string(NullStatistic statistic);
NullStatistic parse_null_statistic(std::string_view text);

struct NullOptions {
  int replicates = 100;
  NullMode mode = NullMode::warm;
  /// Warm mode only: also retrain the temporal residuals (starting from the
  /// real model's values) instead of keeping them fixed.
  bool retrain_temporal = true;
  RandomizeMode randomize = RandomizeMode::tokens;
  /// max_pair matches the argmax selection of lead_candidates; `lead`
  /// supplies its pair rules.
  NullStatistic statistic = NullStatistic::max_pair;
  LeadOptions lead;
  std::uint64_t seed = 1;
  int threads = 1;
  double epsilon = kDefaultLeadEpsilon;
  int max_retries = 3;
  std::function<void(const std::string&)> log;
};

struct NullResult {
  std::map<LeadTuple, std::vector<double>> scores;  // K values per tuple
  std::vector<std::uint64_t> seeds;                 // seed that produced each replicate
  int undefined_draws = 0;
  int retries = 0;
};

/// Lead scores of `tuples` under K randomized corpora, each with its own
/// retrained source-conditional model. Undefined draws count as 1.
NullResult null_distributions(const EmbeddingModel& real, std::span<const Document> docs, const Vocabulary& vocab,
                              std::span<const LeadTuple> tuples, const NullOptions& options);
std::vector<double> null_distribution(const EmbeddingModel& real, std::span<const Document> docs,
                                      const Vocabulary& vocab, const LeadTuple& tuple, const NullOptions& options);

/// Nearest-rank percentile: the ceil(p/100 * n)-th smallest value (1-based,
/// at least the first).
double percentile_nearest_rank(std::vector<double> values, double p);

struct LeadEvent {
  LeadTuple tuple;
  double score = 0;
  double threshold = 0;
  bool accepted = false;
  std::vector<double> null_scores;
};

/// Compares each observed score with the percentile of its null draws;
/// accepted iff strictly greater.
std::vector<LeadEvent> evaluate_tuples(std::span<const LeadTuple> tuples, std::span<const double> scores,
                                       const std::map<LeadTuple, std::vector<double>>& nulls, double percentile);

/// Argmax pair for each candidate word and each adjacent interval where the
/// word occurs in both bins.
std::vector<std::pair<LeadTuple, double>> lead_candidates(const EmbeddingModel& model, const Vocabulary& vocab,
                                                          std::span<const int> words, const LeadOptions& options);

struct LeadRunReport {
  std::vector<LeadEvent> events;
  std::vector<std::uint64_t> seeds;
  int undefined_draws = 0;
  int retries = 0;
};

/// Full test: candidates from `changes`, null draws per candidate tuple and
/// the percentile rule. The null draws use `lead` for their pair rules.
/// Events come out sorted by tuple.
LeadRunReport significant_events(std::span<const ChangeRecord> changes, const EmbeddingModel& model,
                                 std::span<const Document> docs, const Vocabulary& vocab,
                                 const LeadOptions& lead, const NullOptions& nulls, double percentile = 95.0);

/// `word,leader,follower,t1,t2,score,threshold,accepted`.
void write_events(std::ostream& out, std::span<const LeadEvent> events, const Vocabulary& vocab,
                  const SourceTable& sources);
std::vector<LeadEvent> read_events(std::istream& in, const Vocabulary& vocab, const SourceTable& sources);
/// `word,leader,follower,t1,t2,replicate,score`.
void write_null_scores(std::ostream& out, std::span<const LeadEvent> events, const Vocabulary& vocab,
                       const SourceTable& sources);

}  // namespace semlead
