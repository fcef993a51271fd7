#include <algorithm>
#include <numeric>

#include <omp.h>

#include "semlead/common.hpp"
#include "semlead/kernels.hpp"
#include "sgd_step.hpp"

namespace semlead::kernels {

// Each thread walks a contiguous block of the shuffled document order and
// updates the shared tables without synchronization. The learning rate uses a
// per-thread progress estimate scaled by the thread count.
TrainReport sgd_hogwild(EmbeddingModel& model, std::span<const Document> docs, const AliasSampler& noise,
                        const TrainOptions& options) {
  const auto& h = model.hyper;
  const int threads = std::max(1, options.threads);
  const std::int64_t per_epoch = detail::count_pairs(docs, h.window);
  const std::int64_t total = per_epoch * h.epochs;
  std::vector<std::size_t> order(docs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainReport report;
  std::vector<std::int64_t> processed(static_cast<std::size_t>(threads), 0);
  for (int epoch = 0; epoch < h.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(h.seed, {0x5f, static_cast<std::uint64_t>(epoch)}));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    const bool last = epoch + 1 == h.epochs;
    double loss_sum = 0;
    std::int64_t pairs = 0;
#pragma omp parallel num_threads(threads) reduction(+ : loss_sum, pairs)
    {
      const int tid = omp_get_thread_num();
      const int nth = omp_get_num_threads();
      const std::size_t n = order.size();
      const std::size_t lo = n * static_cast<std::size_t>(tid) / static_cast<std::size_t>(nth);
      const std::size_t hi = n * static_cast<std::size_t>(tid + 1) / static_cast<std::size_t>(nth);
      detail::Scratch scratch(model.dims());
      Rng rng(derive_seed(h.seed, {0x6e67, static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(tid)}));
      // Progress counted in units of the whole run: each thread sees roughly
      // 1/nth of the pairs, so its local count is scaled back up.
      std::int64_t local = processed[static_cast<std::size_t>(tid)];
      const std::int64_t local_total = std::max<std::int64_t>(1, total / nth);
      for (std::size_t i = lo; i < hi; ++i)
        detail::sgd_document(model, docs[order[i]], local, local_total, noise, rng, options, scratch, last,
                             loss_sum, pairs);
      processed[static_cast<std::size_t>(tid)] = local;
    }
    check_finite(model);
    report.final_loss = pairs > 0 ? loss_sum / static_cast<double>(pairs) : 0.0;
    report.pairs = pairs;
    report.epochs = epoch + 1;
  }
  return report;
}

}  // namespace semlead::kernels
