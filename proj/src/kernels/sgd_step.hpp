#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "semlead/embed.hpp"
#include "semlead/sampling.hpp"

namespace semlead::kernels::detail {

inline float sigmoid(float x) {
  if (x > 30.f) return 1.f;
  if (x < -30.f) return 0.f;
  return 1.f / (1.f + std::exp(-x));
}

inline std::int64_t count_pairs(std::span<const Document> docs, int window) {
  std::int64_t n = 0;
  for (const auto& d : docs) {
    const auto len = static_cast<std::int64_t>(d.tokens.size());
    for (std::int64_t i = 0; i < len; ++i)
      n += std::min<std::int64_t>(i, window) + std::min<std::int64_t>(len - 1 - i, window);
  }
  return n;
}

/// Scratch buffers owned by one worker.
struct Scratch {
  explicit Scratch(int dims) : u(static_cast<std::size_t>(dims)), grad(static_cast<std::size_t>(dims)) {}
  std::vector<float> u, grad;
};

/// One SGD step on (center, context) with freshly drawn negatives. Returns the
/// pair's data loss when `track_loss` is set, else 0.
template <typename Engine>
double sgd_pair(EmbeddingModel& m, const Document& doc, int center, int context, double lr_d,
                const AliasSampler& noise, Engine& rng, const TrainOptions& opt, Scratch& s, bool track_loss) {
  const int d = m.dims();
  const bool source_kind = m.kind() == ModelKind::source_conditional;
  const float lr = static_cast<float>(lr_d);
  float* a = m.base(center).data();
  const int tslot = m.temporal_slot(center, doc.bin);
  const int sslot = source_kind ? m.source_slot(center, doc.bin, doc.source) : -1;
  float* r = tslot >= 0 ? m.temporal(tslot).data() : nullptr;
  float* q = sslot >= 0 ? m.source(sslot).data() : nullptr;
  float* u = s.u.data();
  float* grad = s.grad.data();

#pragma omp simd
  for (int k = 0; k < d; ++k) {
    u[k] = a[k];
    grad[k] = 0.f;
  }
  if (r) {
#pragma omp simd
    for (int k = 0; k < d; ++k) u[k] += r[k];
  }
  if (q) {
#pragma omp simd
    for (int k = 0; k < d; ++k) u[k] += q[k];
  }

  double loss = 0;
  auto visit = [&](int target, float label) {
    float* b = m.output(target).data();
    float f = 0.f;
#pragma omp simd reduction(+ : f)
    for (int k = 0; k < d; ++k) f += b[k] * u[k];
    const float sig = sigmoid(f);
    const float g = label - sig;
    if (track_loss) loss -= std::log(std::max(static_cast<double>(label > 0 ? sig : 1.f - sig), 1e-30));
#pragma omp simd
    for (int k = 0; k < d; ++k) grad[k] += g * b[k];
    if (opt.update_output) {
      const float step = lr * g;
#pragma omp simd
      for (int k = 0; k < d; ++k) b[k] += step * u[k];
    }
  };
  visit(context, 1.f);
  for (int n = 0; n < m.hyper.negatives; ++n) {
    const int neg = noise(rng);
    if (neg == context) continue;
    visit(neg, 0.f);
  }

  const float decay = static_cast<float>(2.0 * m.hyper.l2_lambda);
  if (opt.update_base) {
#pragma omp simd
    for (int k = 0; k < d; ++k) a[k] += lr * grad[k];
  }
  if (opt.update_temporal && r) {
#pragma omp simd
    for (int k = 0; k < d; ++k) r[k] += lr * (grad[k] - decay * r[k]);
  }
  if (opt.update_source && q) {
#pragma omp simd
    for (int k = 0; k < d; ++k) q[k] += lr * (grad[k] - decay * q[k]);
  }
  return loss;
}

/// Pairs of one document in order: for each center, contexts left to right.
template <typename Engine>
void sgd_document(EmbeddingModel& m, const Document& doc, std::int64_t& processed, std::int64_t total,
                  const AliasSampler& noise, Engine& rng, const TrainOptions& opt, Scratch& s,
                  bool track_loss, double& loss_sum, std::int64_t& pairs) {
  const int len = static_cast<int>(doc.tokens.size());
  const int window = m.hyper.window;
  const double lr0 = m.hyper.learning_rate, lr_min = m.hyper.min_learning_rate;
  for (int i = 0; i < len; ++i) {
    const int lo = std::max(0, i - window), hi = std::min(len - 1, i + window);
    for (int j = lo; j <= hi; ++j) {
      if (j == i) continue;
      const double frac = total > 0 ? static_cast<double>(processed) / static_cast<double>(total) : 0.0;
      const double lr = std::max(lr_min, lr0 * (1.0 - frac));
      loss_sum += sgd_pair(m, doc, doc.tokens[static_cast<std::size_t>(i)],
                           doc.tokens[static_cast<std::size_t>(j)], lr, noise, rng, opt, s, track_loss);
      ++processed;
      ++pairs;
    }
  }
}

}  // namespace semlead::kernels::detail
