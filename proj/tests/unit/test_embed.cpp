#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "semlead/embed.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace semlead;

namespace {

double residual_norm2(const EmbeddingModel& m) {
  double s = 0;
  for (float x : m.temporal_table()) s += static_cast<double>(x) * x;
  return s;
}

Hyperparams small_hyper(std::uint64_t seed = 5) {
  Hyperparams h;
  h.dims = 12;
  h.window = 3;
  h.epochs = 2;
  h.seed = seed;
  return h;
}

}  // namespace

TEST_CASE("hyperparameter validation") {
  Hyperparams h;
  CHECK_NOTHROW(h.validate());
  CHECK(h.dims == 100);
  CHECK(h.window == 5);
  CHECK(h.l2_lambda == 1e-4);
  h.window = 0;
  CHECK_THROWS_AS(h.validate(), Error);
  CHECK(parse_model_kind("source") == ModelKind::source_conditional);
  CHECK(parse_model_kind("temporal") == ModelKind::temporal);
  CHECK_THROWS_AS(parse_model_kind("spatial"), Error);
}

TEST_CASE("init is seeded, bounded and leaves residuals zero") {
  auto c = fixture::encode(fixture::tiny_config(), 1);
  auto h = small_hyper();
  auto a = init_model(c.vocab, ModelKind::source_conditional, h);
  auto b = init_model(c.vocab, ModelKind::source_conditional, h);
  CHECK(a.identical(b));
  const float bound = 0.5f / static_cast<float>(h.dims);
  for (float x : a.base_table()) REQUIRE(std::abs(x) <= bound);
  for (float x : a.temporal_table()) REQUIRE(x == 0.0f);
  for (float x : a.source_table()) REQUIRE(x == 0.0f);
  CHECK(a.source_slots() > 0);
  h.seed = 6;
  CHECK_FALSE(init_model(c.vocab, ModelKind::source_conditional, h).identical(a));
}

TEST_CASE("compose_input adds the residual layers") {
  EmbeddingModel m(ModelKind::source_conditional, 2, 1, 2, 2);
  m.add_temporal_slot(0, 0);
  m.add_source_slot(0, 0, 0);
  m.base(0)[0] = 1;
  m.temporal(0)[1] = 1;
  m.source(0)[0] = 1;
  m.source(0)[1] = 1;
  CHECK(compose_input(m, 0, 0, 0) == std::vector<double>{2, 2});
  CHECK(compose_input(m, 0, 0) == std::vector<double>{1, 1});
  CHECK(compose_input(m, 0, 0, 1) == std::vector<double>{1, 1});
  CHECK(compose_input(m, 1, 0, 0) == std::vector<double>{0, 0});

  EmbeddingModel t(ModelKind::temporal, 2, 1, 2, 2);
  t.base(1)[0] = 0.25f;
  CHECK(compose_input(t, 1, 0) == std::vector<double>{0.25, 0});
  CHECK_THROWS_AS(compose_input(t, 1, 0, 0), KindMismatch);
}

TEST_CASE("loss hand values") {
  EmbeddingModel m(ModelKind::temporal, 3, 1, 1, 2);
  m.hyper.l2_lambda = 0;
  TrainingPair p{0, 0, -1, 1, {2}, 1.0};
  CHECK(loss(m, std::span(&p, 1)) == doctest::Approx(2 * std::log(2.0)));

  m.base(0)[0] = 1;
  m.output(1)[0] = 1;
  m.output(2)[0] = 1;
  CHECK(loss(m, std::span(&p, 1)) == doctest::Approx(1.6265233).epsilon(1e-7));

  m.add_temporal_slot(0, 0);
  m.temporal(0)[1] = 0.5f;
  const double before = loss(m, std::span(&p, 1));
  m.hyper.l2_lambda = 0.1;
  CHECK(loss(m, std::span(&p, 1)) > before);
  CHECK(loss(m, std::span(&p, 1)) == doctest::Approx(before + 0.1 * 0.25));
}

TEST_CASE("gradient matches central differences") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<TrainingPair> batch;
    auto m = oracle::toy_model(rng, batch);
    auto r = oracle::finite_difference_check(m, batch, 1e-4, 1e-4);
    CHECK(r.entries > 0);
    CHECK(r.failures == 0);
  }
}

TEST_CASE("gradient structure") {
  std::mt19937_64 rng(3);
  std::vector<TrainingPair> batch;
  auto m = oracle::toy_model(rng, batch);
  for (auto& p : batch) p.weight = 0;
  auto zero = gradient(m, batch);
  CHECK(zero.base.empty());
  CHECK(zero.output.empty());

  // One pair: base gradient equals the residual gradients minus their l2 terms.
  TrainingPair p{0, 1, 0, 3, {4, 5}, 1.0};
  m.add_temporal_slot(0, 1);
  m.add_source_slot(0, 1, 0);
  m.hyper.l2_lambda = 0.01;
  auto g = gradient(m, std::span(&p, 1));
  const int ts = m.temporal_slot(0, 1), ss = m.source_slot(0, 1, 0);
  for (int k = 0; k < m.dims(); ++k) {
    CHECK(g.temporal.at(ts)[k] - 2 * 0.01 * m.temporal(ts)[k] == doctest::Approx(g.base.at(0)[k]));
    CHECK(g.source.at(ss)[k] - 2 * 0.01 * m.source(ss)[k] == doctest::Approx(g.base.at(0)[k]));
  }
}

TEST_CASE("nearest neighbors") {
  EmbeddingModel m(ModelKind::temporal, 5, 1, 1, 2);
  const float v[5][2] = {{1, 0}, {0.8f, 0.6f}, {1, 0}, {-1, 0}, {0, 1}};
  for (int w = 0; w < 5; ++w) {
    m.base(w)[0] = v[w][0];
    m.base(w)[1] = v[w][1];
  }
  auto nn = nearest_neighbors(m, 0, 0, 3);
  REQUIRE(nn.size() == 3);
  CHECK(nn[0].word == 2);
  CHECK(nn[0].cosine == doctest::Approx(1.0));
  CHECK(nn[1].word == 1);
  CHECK(nn[2].word == 4);

  // Exhaustive oracle over all words for k = 3 from word 1.
  std::vector<std::pair<double, int>> all;
  for (int w = 0; w < 5; ++w) {
    if (w == 1) continue;
    double c = (v[1][0] * v[w][0] + v[1][1] * v[w][1]) / std::hypot(v[w][0], v[w][1]);
    all.push_back({-c, w});
  }
  std::sort(all.begin(), all.end());
  auto n1 = nearest_neighbors(m, 1, 0, 3);
  for (int i = 0; i < 3; ++i) CHECK(n1[static_cast<std::size_t>(i)].word == all[static_cast<std::size_t>(i)].second);

  EmbeddingModel onehot(ModelKind::temporal, 4, 1, 1, 4);
  for (int w = 0; w < 4; ++w) onehot.base(w)[static_cast<std::size_t>(w)] = 1;
  auto o = nearest_neighbors(onehot, 2, 0, 3);
  CHECK(o[0].word == 0);
  CHECK(o[1].word == 1);
  CHECK(o[2].word == 3);
  CHECK(o[2].cosine == 0.0);
  CHECK_THROWS_AS(nearest_neighbors(onehot, 0, 0, 4), Error);
}

TEST_CASE("serial training is bit-reproducible and keeps structural zeros") {
  auto c = fixture::encode(fixture::tiny_config(), 2);
  auto h = small_hyper();
  auto a = init_model(c.vocab, ModelKind::source_conditional, h);
  auto b = a;
  auto ra = train(a, c.docs, c.vocab);
  auto rb = train(b, c.docs, c.vocab);
  CHECK(a.identical(b));
  CHECK(ra.final_loss == rb.final_loss);
  CHECK(std::isfinite(ra.final_loss));
  CHECK(ra.pairs > 0);
  for (int w = 0; w < c.vocab.size(); ++w)
    for (int t = 0; t < c.bins(); ++t) {
      CHECK((a.temporal_slot(w, t) >= 0) == (c.vocab.bin_count(w, t) > 0));
      for (int s = 0; s < c.num_sources(); ++s)
        REQUIRE((a.source_slot(w, t, s) >= 0) == (c.vocab.count(w, s, t) > 0));
    }
  for (float x : a.source_table()) CHECK(std::isfinite(x));
}

TEST_CASE("a word seen in one bin only gets a residual in that bin only") {
  auto c = fixture::encode(fixture::tiny_config(), 3);
  std::vector<Document> docs = c.docs;
  const int w = 0;
  for (auto& d : docs)
    if (d.bin != 3) std::erase(d.tokens, w);
  std::erase_if(docs, [](const Document& d) { return d.tokens.empty(); });
  auto vocab = c.vocab;
  vocab.recount(docs);
  auto m = init_model(vocab, ModelKind::temporal, small_hyper());
  train(m, docs, vocab);
  for (int t = 0; t < 3; ++t) CHECK(m.temporal_slot(w, t) < 0);
  REQUIRE(m.temporal_slot(w, 3) >= 0);
  double n = 0;
  for (float x : m.temporal(m.temporal_slot(w, 3))) n += std::abs(x);
  CHECK(n > 0);
}

TEST_CASE("stronger l2 shrinks the temporal residuals") {
  auto c = fixture::encode(fixture::tiny_config(), 4);
  double prev = INFINITY;
  for (double lambda : {1e-4, 1e-2, 1.0}) {
    auto h = small_hyper();
    h.l2_lambda = lambda;
    auto m = init_model(c.vocab, ModelKind::temporal, h);
    train(m, c.docs, c.vocab);
    const double n = residual_norm2(m);
    CHECK(n <= prev);
    prev = n;
  }
}

TEST_CASE("parallel training stays finite") {
  auto c = fixture::encode(fixture::tiny_config(), 5);
  auto m = init_model(c.vocab, ModelKind::source_conditional, small_hyper());
  TrainOptions opt;
  opt.threads = 3;
  auto r = train(m, c.docs, c.vocab, opt);
  CHECK(std::isfinite(r.final_loss));
  CHECK_NOTHROW(check_finite(m));
}

TEST_CASE("divergence is reported") {
  auto c = fixture::encode(fixture::tiny_config(), 5);
  auto m = init_model(c.vocab, ModelKind::temporal, small_hyper());
  m.base_table()[7] = NAN;
  CHECK_THROWS_AS(check_finite(m), DivergenceError);
}

TEST_CASE("model files round-trip and reject damage") {
  auto c = fixture::encode(fixture::tiny_config(), 6);
  auto m = init_model(c.vocab, ModelKind::source_conditional, small_hyper());
  train(m, c.docs, c.vocab);
  auto dir = fixture::temp_dir("embed");
  auto p = dir / "m.bin";
  save_model(m, p);
  auto back = load_model(p);
  CHECK(back.identical(m));
  CHECK_NOTHROW(check_vocab(back, c.vocab));
  CHECK_THROWS_AS(require_kind(back, ModelKind::temporal), KindMismatch);

  Vocabulary other({"zzz"}, c.num_sources(), c.bins());
  CHECK_THROWS_AS(check_vocab(back, other), Error);

  {
    std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(2);
    f.put('X');
  }
  CHECK_THROWS_AS(load_model(p), Error);

  save_model(m, p);
  std::filesystem::resize_file(p, std::filesystem::file_size(p) - 3);
  CHECK_THROWS_AS(load_model(p), Error);
}
