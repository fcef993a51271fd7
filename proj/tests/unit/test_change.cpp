#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "semlead/change.hpp"
#include "support/fixtures.hpp"

using namespace semlead;

namespace {

EmbeddingModel table_model(const std::vector<std::vector<float>>& rows) {
  EmbeddingModel m(ModelKind::temporal, static_cast<int>(rows.size()), 1, 1, static_cast<int>(rows[0].size()));
  for (std::size_t w = 0; w < rows.size(); ++w)
    for (std::size_t k = 0; k < rows[w].size(); ++k) m.base(static_cast<int>(w))[k] = rows[w][k];
  return m;
}

double direct_cosine(const std::vector<float>& a, const std::vector<float>& b) {
  double d = 0, na = 0, nb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    d += static_cast<double>(a[k]) * b[k];
    na += static_cast<double>(a[k]) * a[k];
    nb += static_cast<double>(b[k]) * b[k];
  }
  return na > 0 && nb > 0 ? d / std::sqrt(na * nb) : 0.0;
}

EmbeddingModel random_model(int V, int T, int D, std::uint64_t seed) {
  EmbeddingModel m(ModelKind::temporal, V, T, 1, D);
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n(0.f, 1.f);
  for (int w = 0; w < V; ++w)
    for (int t = 0; t < T; ++t) m.add_temporal_slot(w, t);
  for (auto& x : m.base_table()) x = n(rng);
  for (auto& x : m.temporal_table()) x = 0.7f * n(rng);
  m.hyper.dims = D;
  return m;
}

Vocabulary flat_vocab(int V, int T, int count) {
  std::vector<std::string> words;
  for (int w = 0; w < V; ++w) words.push_back("word" + std::to_string(w));
  Vocabulary v(words, 1, T);
  std::vector<Document> docs;
  for (int t = 0; t < T; ++t) {
    Document d{"d" + std::to_string(t), 0, t, {}};
    for (int w = 0; w < V; ++w)
      for (int c = 0; c < count; ++c) d.tokens.push_back(w);
    docs.push_back(d);
  }
  v.recount(docs);
  return v;
}

}  // namespace

TEST_CASE("neighbor profile against per-entry cosines") {
  std::vector<std::vector<float>> rows{{1, 2, 0}, {0, 1, 1}, {-1, 0.5f, 2}, {3, -1, 1}};
  auto m = table_model(rows);
  std::vector<int> set{3, 1, 2};
  auto p = neighbor_profile(m, 0, 0, set);
  REQUIRE(p.size() == 3);
  for (std::size_t i = 0; i < set.size(); ++i)
    CHECK(p[i] == doctest::Approx(direct_cosine(rows[0], rows[static_cast<std::size_t>(set[i])])).epsilon(1e-12));

  auto same = table_model({{1, 1}, {1, 1}});
  std::vector<int> one{1};
  CHECK(neighbor_profile(same, 0, 0, one)[0] == doctest::Approx(1.0));
  auto ortho = table_model({{1, 0}, {0, 1}});
  CHECK(neighbor_profile(ortho, 0, 0, one)[0] == 0.0);
  auto zero = table_model({{0, 0}, {0, 1}});
  CHECK(neighbor_profile(zero, 0, 0, one)[0] == 0.0);
  std::vector<int> self{0};
  CHECK_THROWS_AS(neighbor_profile(ortho, 0, 0, self), Error);
}

TEST_CASE("change score range, identity and symmetry") {
  auto m = random_model(40, 4, 6, 17);
  for (int w = 0; w < 40; ++w)
    for (int t1 = 0; t1 < 4; ++t1)
      for (int t2 = t1 + 1; t2 < 4; ++t2) {
        auto a = change_score(m, w, t1, t2, 5);
        auto b = change_score(m, w, t2, t1, 5);
        REQUIRE(a.has_value());
        CHECK(*a == *b);
        CHECK(*a >= 0.0);
        CHECK(*a <= 2.0);
      }

  // Bins 0 and 1 identical for every word.
  for (int w = 0; w < 40; ++w) {
    auto r0 = m.temporal(m.temporal_slot(w, 0));
    auto r1 = m.temporal(m.temporal_slot(w, 1));
    std::copy(r0.begin(), r0.end(), r1.begin());
  }
  for (int w = 0; w < 40; ++w) CHECK(*change_score(m, w, 0, 1, 5) == doctest::Approx(0.0).epsilon(1e-12));

  EmbeddingModel sparse(ModelKind::temporal, 5, 2, 1, 2);
  sparse.add_temporal_slot(0, 0);
  CHECK_FALSE(change_score(sparse, 0, 0, 1, 2).has_value());
  CHECK_THROWS_AS(change_score(sparse, 0, 1, 1, 2), Error);
}

TEST_CASE("rank_changes is the per-word argmax and thread-count independent") {
  const int V = 60, T = 5;
  auto m = random_model(V, T, 8, 99);
  auto vocab = flat_vocab(V, T, 3);
  m.vocab_hash = vocab.hash();
  ChangeParams p;
  p.k = 6;
  auto serial = rank_changes(m, vocab, p, 1);
  auto parallel = rank_changes(m, vocab, p, 4);
  REQUIRE(serial.size() == static_cast<std::size_t>(V));
  REQUIRE(parallel.size() == serial.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].word == parallel[i].word);
    CHECK(serial[i].score == parallel[i].score);
    CHECK(serial[i].t_from == parallel[i].t_from);
    CHECK(serial[i].t_to == parallel[i].t_to);
    if (i > 0) CHECK(serial[i - 1].score >= serial[i].score);
  }
  for (const auto& r : serial) {
    double best = -1;
    for (int t1 = 0; t1 < T; ++t1)
      for (int t2 = t1 + 1; t2 < T; ++t2) best = std::max(best, *change_score(m, r.word, t1, t2, p.k));
    CHECK(r.score == best);
    CHECK(*change_score(m, r.word, r.t_from, r.t_to, p.k) == r.score);
    CHECK(r.t_from < r.t_to);
  }

  auto sparse_vocab = flat_vocab(V, T, 2);
  CHECK(rank_changes(m, sparse_vocab, p, 1).empty());
}

TEST_CASE("filter rules") {
  std::vector<std::string> words{"ab", "tail-", "rare", "solo", "thin", "kept", "boston", "good"};
  const int S = 4, T = 10;
  Vocabulary v(words, S, T);
  std::vector<Document> docs;
  auto put = [&](int w, int s, int t, int n) {
    Document d{"x", s, t, std::vector<std::int32_t>(static_cast<std::size_t>(n), w)};
    docs.push_back(d);
  };
  for (int w : {0, 1, 4, 5, 6, 7})
    for (int s = 0; s < S; ++s)
      for (int t = 0; t < T; ++t) put(w, s, t, 1);
  for (int s = 0; s < S; ++s)
    for (int t = 0; t < 5; ++t) put(2, s, t, 2);  // five zero-count bins
  for (int t = 0; t < T; ++t) put(3, 0, t, 5);    // one source
  v.recount(docs);
  // "thin" occurs 4 times per bin, so a 5-occurrence floor rejects it.
  FilterRuleSet rules;
  rules.stoplist = {"boston"};
  std::vector<ChangeRecord> recs;
  for (int w = 0; w < 8; ++w) recs.push_back({w, 1.0 - 0.1 * w, 1, 3});
  std::vector<FilterAuditEntry> audit;
  auto kept = filter_changes(recs, v, rules, 10, &audit);
  REQUIRE(kept.size() == 3);
  CHECK(kept[0].word == 4);
  CHECK(kept[1].word == 5);
  CHECK(kept[2].word == 7);
  REQUIRE(audit.size() == 5);
  CHECK(audit[0].rule == "min_length");
  CHECK(audit[1].rule == "trailing_hyphen");
  CHECK(audit[2].rule == "max_zero_count_bins");
  CHECK(audit[3].rule == "min_distinct_sources");
  CHECK(audit[4].rule == "stoplist");

  rules.min_change_bin_occurrences = 5;
  audit.clear();
  kept = filter_changes(recs, v, rules, 10, &audit);
  CHECK(kept.empty());

  FilterRuleSet permissive;
  permissive.min_length = 0;
  permissive.reject_trailing_hyphen = false;
  permissive.max_zero_count_bins = T;
  permissive.min_distinct_sources = 0;
  permissive.min_change_bin_occurrences = 0;
  kept = filter_changes(recs, v, permissive, 5);
  REQUIRE(kept.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(kept[static_cast<std::size_t>(i)].word == i);
}

TEST_CASE("changes table round-trips") {
  Vocabulary v({"alpha", "beta"}, 1, 4);
  std::vector<ChangeRecord> recs{{1, 0.123456789012345, 0, 3}, {0, 1e-9, 1, 2}};
  std::stringstream ss;
  write_changes(ss, recs, v);
  auto back = read_changes(ss, v);
  REQUIRE(back.size() == 2);
  CHECK(back[0].word == 1);
  CHECK(back[0].score == recs[0].score);
  CHECK(back[1].score == recs[1].score);
  CHECK(back[1].t_to == 2);

  std::stringstream bad("word,score,t_from,t_to\ngamma,0.5,0,1\n");
  CHECK_THROWS_AS(read_changes(bad, v), Error);
}
