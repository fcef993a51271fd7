#include <algorithm>
#include <numeric>

#include "semlead/common.hpp"
#include "semlead/kernels.hpp"
#include "sgd_step.hpp"

namespace semlead::kernels {

TrainReport sgd_serial(EmbeddingModel& model, std::span<const Document> docs, const AliasSampler& noise,
                       const TrainOptions& options) {
  const auto& h = model.hyper;
  const std::int64_t per_epoch = detail::count_pairs(docs, h.window);
  const std::int64_t total = per_epoch * h.epochs;
  std::vector<std::size_t> order(docs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  detail::Scratch scratch(model.dims());
  Rng neg_rng(derive_seed(h.seed, {0x6e67}));

  TrainReport report;
  std::int64_t processed = 0;
  for (int epoch = 0; epoch < h.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(h.seed, {0x5f, static_cast<std::uint64_t>(epoch)}));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    const bool last = epoch + 1 == h.epochs;
    double loss_sum = 0;
    std::int64_t pairs = 0;
    for (auto i : order)
      detail::sgd_document(model, docs[i], processed, total, noise, neg_rng, options, scratch, last, loss_sum, pairs);
    check_finite(model);
    report.final_loss = pairs > 0 ? loss_sum / static_cast<double>(pairs) : 0.0;
    report.pairs = pairs;
    report.epochs = epoch + 1;
  }
  return report;
}

}  // namespace semlead::kernels
