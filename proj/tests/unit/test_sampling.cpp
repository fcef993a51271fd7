#include <doctest.h>

#include <vector>

#include "semlead/sampling.hpp"

using namespace semlead;

TEST_CASE("alias table probabilities are normalized weights") {
  std::vector<double> w{1, 0, 3, 6};
  AliasSampler a(w);
  CHECK(a.probability(0) == doctest::Approx(0.1));
  CHECK(a.probability(1) == 0.0);
  CHECK(a.probability(3) == doctest::Approx(0.6));
}

TEST_CASE("alias draws follow the weights") {
  std::vector<double> w{5, 1, 0, 2, 2};
  AliasSampler a(w);
  Rng rng(123);
  const int n = 200000;
  std::vector<int> hist(w.size(), 0);
  for (int i = 0; i < n; ++i) ++hist[static_cast<std::size_t>(a(rng))];
  CHECK(hist[2] == 0);
  // Pearson chi-square over the four nonzero cells, 3 dof; 16.27 is the 0.999 quantile.
  double chi2 = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0) continue;
    const double e = n * a.probability(static_cast<int>(i));
    chi2 += (hist[i] - e) * (hist[i] - e) / e;
  }
  CHECK(chi2 < 16.27);
}

TEST_CASE("noise sampler uses count^exponent") {
  std::vector<std::int64_t> counts{16, 1, 0};
  auto s = make_noise_sampler(counts, 0.75);
  CHECK(s.probability(0) == doctest::Approx(8.0 / 9.0));
  CHECK(s.probability(2) == 0.0);
}

TEST_CASE("invalid weights") {
  std::vector<double> zero{0, 0};
  CHECK_THROWS_AS(AliasSampler{zero}, Error);
  std::vector<double> neg{1, -1};
  CHECK_THROWS_AS(AliasSampler{neg}, Error);
  CHECK_THROWS_AS(AliasSampler{std::span<const double>{}}, Error);
}
