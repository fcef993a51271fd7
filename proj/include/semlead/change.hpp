#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "semlead/corpus.hpp"
#include "semlead/embed.hpp"

namespace semlead {

struct ChangeRecord {
  int word = 0;
  double score = 0;  // in [0, 2]
  int t_from = 0;
  int t_to = 0;      // t_from < t_to
};

struct ChangeParams {
  int k = 25;
  /// A bin pair is scored only when the word occurs at least this often in
  /// both bins.
  std::int64_t min_occurrences = 3;
};

/// Cosine between u(w, t) and u(v, t) for each v in `union_set`, in order.
/// A zero vector has cosine 0 with everything.
std::vector<double> neighbor_profile(const ComposedBin& bin, int w, std::span<const int> union_set);
std::vector<double> neighbor_profile(const EmbeddingModel& model, int w, int t, std::span<const int> union_set);

/// Sorted union of the k nearest neighbors of `w` at t1 and at t2.
std::vector<int> neighbor_union(const ComposedBin& b1, const ComposedBin& b2, int w, int k);

/// 1 - cosine between the two neighbor profiles over the union of the k
/// nearest neighbors at t1 and t2, clamped to [0, 2]. Empty when the word has
/// no temporal residual (zero count) in either bin.
std::optional<double> change_score(const EmbeddingModel& model, int w, int t1, int t2, int k);
double change_score(const ComposedBin& b1, const ComposedBin& b2, int w, int k);

/// Scores every eligible bin pair of every word and keeps each word's
/// maximum. Sorted by descending score, ties by word index. `threads` == 1
/// runs the serial reference; the result is identical for any thread count.
std::vector<ChangeRecord> rank_changes(const EmbeddingModel& model, const Vocabulary& vocab,
                                       const ChangeParams& params, int threads = 1);

struct FilterRuleSet {
  int min_length = 3;
  bool reject_trailing_hyphen = true;
  int max_zero_count_bins = 4;
  int min_distinct_sources = 4;
  std::int64_t min_change_bin_occurrences = 3;
  std::set<std::string> stoplist;
};

struct FilterAuditEntry {
  std::string word;
  std::string rule;
};

/// Drops records failing any rule (checked in declaration order) and keeps
/// the first `top_m`. Each removal is appended to `audit` with the rule name.
std::vector<ChangeRecord> filter_changes(std::span<const ChangeRecord> records, const Vocabulary& vocab,
                                         const FilterRuleSet& rules, std::size_t top_m,
                                         std::vector<FilterAuditEntry>* audit = nullptr);

/// One word per line; blank lines and `#` comments ignored; lowercased.
std::set<std::string> load_stoplist(const std::filesystem::path& path);

/// `word,score,t_from,t_to` with a header row.
void write_changes(std::ostream& out, std::span<const ChangeRecord> records, const Vocabulary& vocab);
std::vector<ChangeRecord> read_changes(std::istream& in, const Vocabulary& vocab);
void write_filter_audit(std::ostream& out, std::span<const FilterAuditEntry> audit);

}  // namespace semlead
