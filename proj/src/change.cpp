#include "semlead/change.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "semlead/common.hpp"
#include "semlead/csv.hpp"

namespace semlead {

std::vector<double> neighbor_profile(const ComposedBin& bin, int w, std::span<const int> union_set) {
  if (union_set.empty()) throw Error("neighbor_profile: empty neighbor set");
  std::vector<double> out;
  out.reserve(union_set.size());
  for (int v : union_set) {
    if (v == w) throw Error("neighbor_profile: neighbor set contains the word itself");
    out.push_back(bin.cosine(w, v));
  }
  return out;
}

std::vector<double> neighbor_profile(const EmbeddingModel& model, int w, int t, std::span<const int> union_set) {
  return neighbor_profile(ComposedBin(model, t), w, union_set);
}

std::vector<int> neighbor_union(const ComposedBin& b1, const ComposedBin& b2, int w, int k) {
  std::vector<int> out;
  for (const auto& n : b1.nearest(w, k)) out.push_back(n.word);
  for (const auto& n : b2.nearest(w, k)) out.push_back(n.word);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

double profile_distance(std::span<const double> p1, std::span<const double> p2) {
  double dot = 0, n1 = 0, n2 = 0;
  for (std::size_t i = 0; i < p1.size(); ++i) {
    dot += p1[i] * p2[i];
    n1 += p1[i] * p1[i];
    n2 += p2[i] * p2[i];
  }
  // The product n1 * n2 is commutative, so swapping the bins gives the same bits.
  const double denom = std::sqrt(n1 * n2);
  const double cos = denom > 0 ? dot / denom : 0.0;
  return std::clamp(1.0 - cos, 0.0, 2.0);
}

double score_from_union(const ComposedBin& b1, const ComposedBin& b2, int w, std::span<const int> u) {
  if (u.empty()) return 0.0;
  auto p1 = neighbor_profile(b1, w, u);
  auto p2 = neighbor_profile(b2, w, u);
  return profile_distance(p1, p2);
}

}  // namespace

double change_score(const ComposedBin& b1, const ComposedBin& b2, int w, int k) {
  auto u = neighbor_union(b1, b2, w, k);
  return score_from_union(b1, b2, w, u);
}

std::optional<double> change_score(const EmbeddingModel& model, int w, int t1, int t2, int k) {
  if (t1 == t2) throw Error("change_score: bins must differ");
  if (t1 < 0 || t2 < 0 || t1 >= model.bins() || t2 >= model.bins()) throw Error("change_score: bin out of range");
  if (k < 1 || k >= model.vocab_size()) throw Error("change_score: k must be in [1, vocabulary size)");
  if (model.temporal_slot(w, t1) < 0 || model.temporal_slot(w, t2) < 0) return std::nullopt;
  return change_score(ComposedBin(model, t1), ComposedBin(model, t2), w, k);
}

std::vector<ChangeRecord> rank_changes(const EmbeddingModel& model, const Vocabulary& vocab,
                                       const ChangeParams& params, int threads) {
  check_vocab(model, vocab);
  if (params.k < 1 || params.k >= model.vocab_size()) throw Error("change: k must be in [1, vocabulary size)");
  if (threads < 1) throw Error("change: thread count must be positive");
  const int V = model.vocab_size(), T = model.bins();

  std::vector<ComposedBin> bins;
  bins.reserve(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) bins.emplace_back(model, t);

  auto eligible = [&](int w, int t) {
    return model.temporal_slot(w, t) >= 0 && vocab.bin_count(w, t) >= params.min_occurrences;
  };

  std::vector<std::optional<ChangeRecord>> best(static_cast<std::size_t>(V));
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads) if (threads > 1)
  for (int w = 0; w < V; ++w) {
    std::vector<std::vector<int>> knn(static_cast<std::size_t>(T));
    std::vector<int> active;
    for (int t = 0; t < T; ++t) {
      if (!eligible(w, t)) continue;
      active.push_back(t);
      for (const auto& n : bins[static_cast<std::size_t>(t)].nearest(w, params.k))
        knn[static_cast<std::size_t>(t)].push_back(n.word);
    }
    std::optional<ChangeRecord> top;
    std::vector<int> u;
    for (std::size_t i = 0; i < active.size(); ++i) {
      for (std::size_t j = i + 1; j < active.size(); ++j) {
        const int t1 = active[i], t2 = active[j];
        const auto& k1 = knn[static_cast<std::size_t>(t1)];
        const auto& k2 = knn[static_cast<std::size_t>(t2)];
        u.assign(k1.begin(), k1.end());
        u.insert(u.end(), k2.begin(), k2.end());
        std::sort(u.begin(), u.end());
        u.erase(std::unique(u.begin(), u.end()), u.end());
        const double s = score_from_union(bins[static_cast<std::size_t>(t1)], bins[static_cast<std::size_t>(t2)], w, u);
        if (!top || s > top->score) top = ChangeRecord{w, s, t1, t2};
      }
    }
    best[static_cast<std::size_t>(w)] = top;
  }

  std::vector<ChangeRecord> out;
  for (const auto& r : best)
    if (r) out.push_back(*r);
  std::stable_sort(out.begin(), out.end(), [](const ChangeRecord& a, const ChangeRecord& b) {
    return a.score != b.score ? a.score > b.score : a.word < b.word;
  });
  return out;
}

std::vector<ChangeRecord> filter_changes(std::span<const ChangeRecord> records, const Vocabulary& vocab,
                                         const FilterRuleSet& rules, std::size_t top_m,
                                         std::vector<FilterAuditEntry>* audit) {
  std::vector<ChangeRecord> out;
  for (const auto& r : records) {
    const std::string& word = vocab.word(r.word);
    const char* failed = nullptr;
    if (static_cast<int>(word.size()) < rules.min_length)
      failed = "min_length";
    else if (rules.reject_trailing_hyphen && !word.empty() && word.back() == '-')
      failed = "trailing_hyphen";
    else if (vocab.zero_count_bins(r.word) > rules.max_zero_count_bins)
      failed = "max_zero_count_bins";
    else if (vocab.distinct_sources(r.word) < rules.min_distinct_sources)
      failed = "min_distinct_sources";
    else if (vocab.bin_count(r.word, r.t_from) < rules.min_change_bin_occurrences ||
             vocab.bin_count(r.word, r.t_to) < rules.min_change_bin_occurrences)
      failed = "min_change_bin_occurrences";
    else if (rules.stoplist.contains(word))
      failed = "stoplist";
    if (failed) {
      if (audit) audit->push_back({word, failed});
      continue;
    }
    if (out.size() < top_m) out.push_back(r);
  }
  return out;
}

std::set<std::string> load_stoplist(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read stoplist " + path.string());
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    auto e = line.find_last_not_of(" \t\r");
    std::string w = line.substr(b, e - b + 1);
    std::transform(w.begin(), w.end(), w.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    out.insert(std::move(w));
  }
  return out;
}

void write_changes(std::ostream& out, std::span<const ChangeRecord> records, const Vocabulary& vocab) {
  out << "word,score,t_from,t_to\n";
  for (const auto& r : records)
    out << csv::field(vocab.word(r.word)) << ',' << csv::number(r.score) << ',' << r.t_from << ',' << r.t_to << '\n';
}

std::vector<ChangeRecord> read_changes(std::istream& in, const Vocabulary& vocab) {
  auto rows = csv::read(in, {"word", "score", "t_from", "t_to"}, "changes");
  std::vector<ChangeRecord> out;
  for (const auto& row : rows) {
    ChangeRecord r;
    r.word = vocab.find(row[0]);
    if (r.word < 0) throw Error("changes: word '" + row[0] + "' is not in the corpus vocabulary");
    r.score = csv::to_double(row[1], "changes score");
    r.t_from = csv::to_int(row[2], "changes t_from");
    r.t_to = csv::to_int(row[3], "changes t_to");
    if (r.t_from < 0 || r.t_to >= vocab.bins() || r.t_from >= r.t_to) throw Error("changes: bad bin pair");
    out.push_back(r);
  }
  return out;
}

void write_filter_audit(std::ostream& out, std::span<const FilterAuditEntry> audit) {
  out << "word,rule\n";
  for (const auto& e : audit) out << csv::field(e.word) << ',' << e.rule << '\n';
}

}  // namespace semlead
