#include <benchmark/benchmark.h>

#include <omp.h>

#include <vector>

#include "semlead/change.hpp"
#include "semlead/embed.hpp"
#include "semlead/kernels.hpp"
#include "semlead/lead.hpp"
#include "semlead/sampling.hpp"
#include "semlead/synth.hpp"

using namespace semlead;

namespace {

struct Fixture {
  EncodedCorpus corpus;
  AliasSampler noise;
  EmbeddingModel temporal;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    auto cfg = scenario("genuine-lead");
    cfg.docs_per_cell = 4;
    CorpusOptions opt;
    opt.bins = cfg.bins;
    opt.span_start = cfg.start;
    opt.span_end = cfg.start + std::chrono::days{static_cast<std::int64_t>(cfg.bins) * cfg.days_per_bin};
    opt.min_articles = 1;
    Fixture out;
    out.corpus = prepare_corpus(generate(cfg, 1).articles, opt);
    std::vector<std::int64_t> counts;
    for (int w = 0; w < out.corpus.vocab.size(); ++w) counts.push_back(out.corpus.vocab.total(w));
    out.noise = make_noise_sampler(counts, 0.75);
    Hyperparams h;
    h.dims = 32;
    h.epochs = 2;
    out.temporal = init_model(out.corpus.vocab, ModelKind::temporal, h);
    train(out.temporal, out.corpus.docs, out.corpus.vocab);
    return out;
  }();
  return f;
}

// 1 and the machine's thread count, without repeats.
std::vector<std::int64_t> thread_counts() {
  const std::int64_t n = omp_get_max_threads();
  return n > 1 ? std::vector<std::int64_t>{1, n} : std::vector<std::int64_t>{1};
}

void thread_args(benchmark::internal::Benchmark* b) {
  for (auto t : thread_counts()) b->Arg(t);
}

EmbeddingModel fresh_model(int dims) {
  Hyperparams h;
  h.dims = dims;
  h.epochs = 1;
  return init_model(fixture().corpus.vocab, ModelKind::source_conditional, h);
}

void BM_SgdSerial(benchmark::State& state) {
  const auto& f = fixture();
  TrainOptions opt;
  for (auto _ : state) {
    state.PauseTiming();
    auto m = fresh_model(static_cast<int>(state.range(0)));
    state.ResumeTiming();
    auto r = kernels::sgd_serial(m, f.corpus.docs, f.noise, opt);
    benchmark::DoNotOptimize(r.final_loss);
    state.SetItemsProcessed(state.items_processed() + r.pairs);
  }
}
BENCHMARK(BM_SgdSerial)->Arg(16)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_SgdHogwild(benchmark::State& state) {
  const auto& f = fixture();
  TrainOptions opt;
  opt.threads = static_cast<int>(state.range(1));
  for (auto _ : state) {
    state.PauseTiming();
    auto m = fresh_model(static_cast<int>(state.range(0)));
    state.ResumeTiming();
    auto r = kernels::sgd_hogwild(m, f.corpus.docs, f.noise, opt);
    benchmark::DoNotOptimize(r.final_loss);
    state.SetItemsProcessed(state.items_processed() + r.pairs);
  }
}
BENCHMARK(BM_SgdHogwild)
    ->ArgsProduct({{16, 100}, thread_counts()})
    ->Unit(benchmark::kMillisecond);

void BM_RankChanges(benchmark::State& state) {
  const auto& f = fixture();
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto ranked = rank_changes(f.temporal, f.corpus.vocab, ChangeParams{}, threads);
    benchmark::DoNotOptimize(ranked.data());
  }
}
BENCHMARK(BM_RankChanges)->Apply(thread_args)->Unit(benchmark::kMillisecond);

void BM_Generate(benchmark::State& state) {
  const auto cfg = scenario("genuine-lead");
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto syn = generate(cfg, 1, threads);
    benchmark::DoNotOptimize(syn.articles.data());
  }
}
BENCHMARK(BM_Generate)->Apply(thread_args)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
