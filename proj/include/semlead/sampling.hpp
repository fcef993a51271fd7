#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "semlead/common.hpp"

namespace semlead {

/// Walker alias table: O(1) draws from a fixed discrete distribution.
class AliasSampler {
 public:
  AliasSampler() = default;
  /// Weights must be non-negative with a positive sum.
  explicit AliasSampler(std::span<const double> weights);

  int size() const { return static_cast<int>(prob_.size()); }
  double probability(int i) const { return p_[static_cast<std::size_t>(i)]; }

  template <typename Engine>
  int operator()(Engine& rng) const {
    const auto n = prob_.size();
    // 53-bit uniform in [0, n); column plus coin from one draw.
    const double x = static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0) * static_cast<double>(n);
    auto col = static_cast<std::size_t>(x);
    if (col >= n) col = n - 1;
    const double coin = x - static_cast<double>(col);
    return coin < prob_[col] ? static_cast<int>(col) : alias_[col];
  }

 private:
  std::vector<double> prob_;
  std::vector<int> alias_;
  std::vector<double> p_;
};

/// Noise distribution for negative sampling: count^exponent, normalized.
AliasSampler make_noise_sampler(std::span<const std::int64_t> counts, double exponent);

}  // namespace semlead
