#include "semlead/lead.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <istream>
#include <numeric>
#include <ostream>

#include "semlead/common.hpp"
#include "semlead/csv.hpp"

namespace semlead {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

}  // namespace

std::optional<double> lead_score(const EmbeddingModel& model, int s1, int s2, int w, int t1, int t2,
                                 double epsilon) {
  require_kind(model, ModelKind::source_conditional);
  if (s1 == s2) throw Error("lead_score: leader and follower must differ");
  const auto leader_t1 = compose_input(model, w, t1, s1);
  const auto follower_t1 = compose_input(model, w, t1, s2);
  const auto follower_t2 = compose_input(model, w, t2, s2);
  const double num = dot(leader_t1, follower_t2);
  const double den = dot(follower_t1, follower_t2);
  if (!(std::abs(den) > epsilon)) return std::nullopt;
  return num / den;
}

std::vector<LeadPair> lead_pairs(const EmbeddingModel& model, int w, int t1, const LeadOptions& options) {
  require_kind(model, ModelKind::source_conditional);
  const int t2 = t1 + 1;
  if (t1 < 0 || t2 >= model.bins()) throw Error("lead: interval out of range");
  const int S = model.sources();
  std::vector<std::vector<double>> at1, at2;
  for (int s = 0; s < S; ++s) {
    at1.push_back(compose_input(model, w, t1, s));
    at2.push_back(compose_input(model, w, t2, s));
  }
  std::vector<LeadPair> out;
  for (int s1 = 0; s1 < S; ++s1) {
    if (options.require_usage && model.source_slot(w, t1, s1) < 0) continue;
    for (int s2 = 0; s2 < S; ++s2) {
      if (s1 == s2) continue;
      if (options.require_usage && (model.source_slot(w, t1, s2) < 0 || model.source_slot(w, t2, s2) < 0))
        continue;
      const auto i1 = static_cast<std::size_t>(s1), i2 = static_cast<std::size_t>(s2);
      const double den = dot(at1[i2], at2[i2]);
      if (!(std::abs(den) > options.epsilon)) continue;
      out.push_back({s1, s2, dot(at1[i1], at2[i2]) / den});
    }
  }
  return out;
}

std::optional<LeadPair> max_lead_pair(const EmbeddingModel& model, int w, int t1, const LeadOptions& options) {
  std::optional<LeadPair> best;
  for (const auto& p : lead_pairs(model, w, t1, options))
    if (!best || p.score > best->score) best = p;  // pairs arrive in lexicographic order
  return best;
}

std::string_view to_string(RandomizeMode mode) { return mode == RandomizeMode::tokens ? "tokens" : "documents"; }

RandomizeMode parse_randomize_mode(std::string_view text) {
  if (text == "tokens") return RandomizeMode::tokens;
  if (text == "documents") return RandomizeMode::documents;
  throw Error("unknown randomization mode '" + std::string(text) + "' (expected tokens|documents)");
}

std::string_view to_string(NullMode mode) { return mode == NullMode::warm ? "warm" : "full"; }

NullMode parse_null_mode(std::string_view text) {
  if (text == "warm") return NullMode::warm;
  if (text == "full") return NullMode::full;
  throw Error("unknown null retrain mode '" + std::string(text) + "' (expected warm|full)");
}

std::vector<Document> randomize_corpus(std::span<const Document> docs, int bins, std::uint64_t seed,
                                       RandomizeMode mode) {
  std::vector<Document> out(docs.begin(), docs.end());
  std::vector<std::vector<std::size_t>> by_bin(static_cast<std::size_t>(bins));
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].bin < 0 || out[i].bin >= bins) throw Error("randomize: document bin out of range");
    by_bin[static_cast<std::size_t>(out[i].bin)].push_back(i);
  }
  for (int t = 0; t < bins; ++t) {
    Rng rng(derive_seed(seed, {0x7a, static_cast<std::uint64_t>(t)}));
    const auto& members = by_bin[static_cast<std::size_t>(t)];
    if (mode == RandomizeMode::tokens) {
      std::vector<std::int32_t> pool;
      for (auto i : members) pool.insert(pool.end(), out[i].tokens.begin(), out[i].tokens.end());
      std::shuffle(pool.begin(), pool.end(), rng);
      std::size_t pos = 0;
      for (auto i : members) {
        auto& toks = out[i].tokens;
        std::copy_n(pool.begin() + static_cast<std::ptrdiff_t>(pos), toks.size(), toks.begin());
        pos += toks.size();
      }
    } else {
      std::vector<std::int32_t> labels;
      for (auto i : members) labels.push_back(out[i].source);
      std::shuffle(labels.begin(), labels.end(), rng);
      for (std::size_t j = 0; j < members.size(); ++j) out[members[j]].source = labels[j];
    }
  }
  return out;
}

std::string_view to_string(NullStatistic statistic) {
  return statistic == NullStatistic::tuple ? "tuple" : "max_pair";
}

NullStatistic parse_null_statistic(std::string_view text) {
  if (text == "tuple") return NullStatistic::tuple;
  if (text == "max_pair") return NullStatistic::max_pair;
  throw Error("unknown null statistic '" + std::string(text) + "' (expected tuple or max_pair)");
}

namespace {

EmbeddingModel replicate_model(const EmbeddingModel& real, std::span<const Document> docs, const Vocabulary& counts,
                               const NullOptions& options, std::uint64_t seed) {
  if (options.mode == NullMode::full) {
    Hyperparams h = real.hyper;
    h.seed = seed;
    auto m = init_model(counts, ModelKind::source_conditional, h);
    train(m, docs, counts);
    return m;
  }
  auto m = warm_start(real, counts, ModelKind::source_conditional, /*copy_temporal=*/true);
  m.hyper.seed = seed;
  TrainOptions opt;
  opt.update_base = false;
  opt.update_output = false;
  opt.update_temporal = options.retrain_temporal;
  train(m, docs, counts, opt);
  return m;
}

}  // namespace

NullResult null_distributions(const EmbeddingModel& real, std::span<const Document> docs, const Vocabulary& vocab,
                              std::span<const LeadTuple> tuples, const NullOptions& options) {
  require_kind(real, ModelKind::source_conditional);
  check_vocab(real, vocab);
  if (options.replicates < 1) throw Error("null: at least one replicate is required");
  if (options.threads < 1) throw Error("null: thread count must be positive");
  const int K = options.replicates;
  const std::size_t n = tuples.size();

  std::vector<std::vector<double>> draws(static_cast<std::size_t>(K), std::vector<double>(n, 1.0));
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(K));
  std::vector<int> undefined(static_cast<std::size_t>(K), 0), retries(static_cast<std::size_t>(K), 0);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(K));

  auto log = [&](const std::string& msg) {
    if (!options.log) return;
#pragma omp critical(semlead_null_log)
    options.log(msg);
  };

#pragma omp parallel for schedule(dynamic, 1) num_threads(options.threads) if (options.threads > 1)
  for (int k = 0; k < K; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    try {
      for (int attempt = 0;; ++attempt) {
        const std::uint64_t seed =
            derive_seed(options.seed, {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(attempt)});
        auto shuffled = randomize_corpus(docs, vocab.bins(), seed, options.randomize);
        Vocabulary counts = vocab;
        counts.recount(shuffled);
        try {
          auto model = replicate_model(real, shuffled, counts, options, seed);
          for (std::size_t i = 0; i < n; ++i) {
            const auto& tp = tuples[i];
            std::optional<double> s;
            if (options.statistic == NullStatistic::tuple) {
              s = lead_score(model, tp.leader, tp.follower, tp.word, tp.t1, tp.t2, options.epsilon);
            } else if (auto best = max_lead_pair(model, tp.word, tp.t1, options.lead)) {
              s = best->score;
            }
            if (s) {
              draws[kk][i] = *s;
            } else {
              ++undefined[kk];
            }
          }
          seeds[kk] = seed;
          break;
        } catch (const DivergenceError& e) {
          if (attempt >= options.max_retries) throw Error(std::string("null replicate failed: ") + e.what());
          ++retries[kk];
          log("replicate " + std::to_string(k) + " diverged, retrying with the next seed: " + e.what());
        }
      }
    } catch (...) {
      errors[kk] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  NullResult result;
  result.seeds = std::move(seeds);
  result.undefined_draws = std::accumulate(undefined.begin(), undefined.end(), 0);
  result.retries = std::accumulate(retries.begin(), retries.end(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto& v = result.scores[tuples[i]];
    v.resize(static_cast<std::size_t>(K));
    for (std::size_t k = 0; k < static_cast<std::size_t>(K); ++k) v[k] = draws[k][i];
  }
  if (result.undefined_draws > 0)
    log(std::to_string(result.undefined_draws) + " undefined null draws recorded as 1");
  return result;
}

std::vector<double> null_distribution(const EmbeddingModel& real, std::span<const Document> docs,
                                      const Vocabulary& vocab, const LeadTuple& tuple, const NullOptions& options) {
  auto r = null_distributions(real, docs, vocab, std::span<const LeadTuple>(&tuple, 1), options);
  return r.scores.at(tuple);
}

double percentile_nearest_rank(std::vector<double> values, double p) {
  if (values.empty()) throw Error("percentile of an empty set");
  if (!(p > 0 && p <= 100)) throw Error("percentile must be in (0, 100]");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  // Round away representation noise before the ceiling, e.g. 0.95 * 20.
  const double rank_real = std::round(p / 100.0 * n * 1e9) / 1e9;
  auto rank = static_cast<std::size_t>(std::ceil(rank_real));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

std::vector<LeadEvent> evaluate_tuples(std::span<const LeadTuple> tuples, std::span<const double> scores,
                                       const std::map<LeadTuple, std::vector<double>>& nulls, double percentile) {
  if (tuples.size() != scores.size()) throw Error("evaluate_tuples: size mismatch");
  std::vector<LeadEvent> out;
  out.reserve(tuples.size());
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    auto it = nulls.find(tuples[i]);
    if (it == nulls.end()) throw Error("evaluate_tuples: missing null distribution");
    LeadEvent e;
    e.tuple = tuples[i];
    e.score = scores[i];
    e.null_scores = it->second;
    e.threshold = percentile_nearest_rank(e.null_scores, percentile);
    e.accepted = e.score > e.threshold;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<std::pair<LeadTuple, double>> lead_candidates(const EmbeddingModel& model, const Vocabulary& vocab,
                                                          std::span<const int> words, const LeadOptions& options) {
  check_vocab(model, vocab);
  std::vector<std::pair<LeadTuple, double>> out;
  for (int w : words) {
    for (int t1 = 0; t1 + 1 < model.bins(); ++t1) {
      if (vocab.bin_count(w, t1) == 0 || vocab.bin_count(w, t1 + 1) == 0) continue;
      if (auto p = max_lead_pair(model, w, t1, options))
        out.push_back({LeadTuple{w, p->leader, p->follower, t1, t1 + 1}, p->score});
    }
  }
  return out;
}

LeadRunReport significant_events(std::span<const ChangeRecord> changes, const EmbeddingModel& model,
                                 std::span<const Document> docs, const Vocabulary& vocab, const LeadOptions& lead,
                                 const NullOptions& nulls, double percentile) {
  require_kind(model, ModelKind::source_conditional);
  std::vector<int> words;
  for (const auto& c : changes)
    if (std::find(words.begin(), words.end(), c.word) == words.end()) words.push_back(c.word);
  auto candidates = lead_candidates(model, vocab, words, lead);
  std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<LeadTuple> tuples;
  std::vector<double> scores;
  for (const auto& [t, s] : candidates) {
    tuples.push_back(t);
    scores.push_back(s);
  }
  LeadRunReport report;
  if (tuples.empty()) return report;
  auto options = nulls;
  options.lead = lead;
  auto null = null_distributions(model, docs, vocab, tuples, options);
  report.events = evaluate_tuples(tuples, scores, null.scores, percentile);
  report.seeds = std::move(null.seeds);
  report.undefined_draws = null.undefined_draws;
  report.retries = null.retries;
  return report;
}

void write_events(std::ostream& out, std::span<const LeadEvent> events, const Vocabulary& vocab,
                  const SourceTable& sources) {
  out << "word,leader,follower,t1,t2,score,threshold,accepted\n";
  for (const auto& e : events) {
    const auto& t = e.tuple;
    out << csv::field(vocab.word(t.word)) << ',' << csv::field(sources.names[static_cast<std::size_t>(t.leader)])
        << ',' << csv::field(sources.names[static_cast<std::size_t>(t.follower)]) << ',' << t.t1 << ',' << t.t2
        << ',' << csv::number(e.score) << ',' << csv::number(e.threshold) << ',' << (e.accepted ? "true" : "false")
        << '\n';
  }
}

std::vector<LeadEvent> read_events(std::istream& in, const Vocabulary& vocab, const SourceTable& sources) {
  auto rows = csv::read(in, {"word", "leader", "follower", "t1", "t2", "score", "threshold", "accepted"}, "events");
  std::vector<LeadEvent> out;
  for (const auto& row : rows) {
    LeadEvent e;
    e.tuple.word = vocab.find(row[0]);
    e.tuple.leader = sources.index_of(row[1]);
    e.tuple.follower = sources.index_of(row[2]);
    if (e.tuple.word < 0) throw Error("events: unknown word '" + row[0] + "'");
    if (e.tuple.leader < 0 || e.tuple.follower < 0) throw Error("events: unknown source in row for '" + row[0] + "'");
    e.tuple.t1 = csv::to_int(row[3], "events t1");
    e.tuple.t2 = csv::to_int(row[4], "events t2");
    e.score = csv::to_double(row[5], "events score");
    e.threshold = csv::to_double(row[6], "events threshold");
    if (row[7] != "true" && row[7] != "false") throw Error("events: accepted must be true or false");
    e.accepted = row[7] == "true";
    out.push_back(std::move(e));
  }
  return out;
}

void write_null_scores(std::ostream& out, std::span<const LeadEvent> events, const Vocabulary& vocab,
                       const SourceTable& sources) {
  out << "word,leader,follower,t1,t2,replicate,score\n";
  for (const auto& e : events) {
    const auto& t = e.tuple;
    for (std::size_t k = 0; k < e.null_scores.size(); ++k)
      out << csv::field(vocab.word(t.word)) << ',' << csv::field(sources.names[static_cast<std::size_t>(t.leader)])
          << ',' << csv::field(sources.names[static_cast<std::size_t>(t.follower)]) << ',' << t.t1 << ',' << t.t2
          << ',' << k << ',' << csv::number(e.null_scores[k]) << '\n';
  }
}

}  // namespace semlead
