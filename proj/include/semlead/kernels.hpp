#pragma once

// Training kernels behind semlead::train(). The serial kernel is the
// reference implementation used by every invariant test; the hogwild kernel
// applies the same per-pair update from several OpenMP threads without
// locking, so lost updates and torn reads are possible while it runs.

#include <span>

#include "semlead/embed.hpp"
#include "semlead/sampling.hpp"

namespace semlead::kernels {

TrainReport sgd_serial(EmbeddingModel& model, std::span<const Document> docs, const AliasSampler& noise,
                       const TrainOptions& options);

TrainReport sgd_hogwild(EmbeddingModel& model, std::span<const Document> docs, const AliasSampler& noise,
                        const TrainOptions& options);

}  // namespace semlead::kernels
