#include "semlead/sampling.hpp"

#include <cmath>
#include <numeric>

namespace semlead {

AliasSampler::AliasSampler(std::span<const double> weights) {
  const std::size_t n = weights.size();
  if (n == 0) throw Error("alias sampler needs at least one weight");
  double sum = 0;
  for (double w : weights) {
    if (!(w >= 0) || !std::isfinite(w)) throw Error("alias sampler weights must be finite and non-negative");
    sum += w;
  }
  if (sum <= 0) throw Error("alias sampler weights sum to zero");

  p_.resize(n);
  prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  std::vector<std::size_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    p_[i] = weights[i] / sum;
    scaled[i] = p_[i] * static_cast<double>(n);
    (scaled[i] < 1.0 ? small : large).push_back(i);
  }
  while (!small.empty() && !large.empty()) {
    auto s = small.back();
    small.pop_back();
    auto l = large.back();
    prob_[s] = scaled[s];
    alias_[s] = static_cast<int>(l);
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (auto i : large) prob_[i] = 1.0;
  for (auto i : small) prob_[i] = 1.0;  // numerical leftovers
}

AliasSampler make_noise_sampler(std::span<const std::int64_t> counts, double exponent) {
  std::vector<double> w(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    w[i] = counts[i] > 0 ? std::pow(static_cast<double>(counts[i]), exponent) : 0.0;
  return AliasSampler(w);
}

}  // namespace semlead
