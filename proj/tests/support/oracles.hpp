#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "semlead/embed.hpp"
#include "semlead/network.hpp"

namespace oracle {

/// PageRank by a dense linear solve of (I - alpha M) x = beta 1.
inline std::vector<double> pagerank_solve(const semlead::DenseMatrix& A, double alpha, double beta) {
  const int n = A.n;
  Eigen::MatrixXd M(n, n);
  for (int j = 0; j < n; ++j) {
    double col = 0;
    for (int i = 0; i < n; ++i) col += A(i, j);
    for (int i = 0; i < n; ++i) M(i, j) = col > 0 ? A(i, j) / col : 1.0 / n;
  }
  Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n, n) - alpha * M;
  Eigen::VectorXd x = lhs.fullPivLu().solve(Eigen::VectorXd::Constant(n, beta));
  return {x.data(), x.data() + n};
}

struct Eigvec {
  std::vector<double> vec;
  double gap = 0;  // relative gap between the two largest eigenvalues
};

/// Leading unit eigenvector of a symmetric PSD matrix, sign fixed nonnegative.
inline Eigvec leading_eigvec(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  const auto n = sym.rows();
  Eigen::VectorXd v = es.eigenvectors().col(n - 1);
  if (v.sum() < 0) v = -v;
  Eigvec r;
  r.vec.assign(v.data(), v.data() + n);
  const double top = es.eigenvalues()(n - 1);
  r.gap = n > 1 ? (top - es.eigenvalues()(n - 2)) / top : 1.0;
  return r;
}

/// Authority = leading eigenvector of A A^T, hub = leading eigenvector of A^T A.
inline std::pair<Eigvec, Eigvec> hits_eig(const semlead::DenseMatrix& W) {
  const int n = W.n;
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = W(i, j);
  return {leading_eigvec(A * A.transpose()), leading_eigvec(A.transpose() * A)};
}

/// True when any contiguous run of `len` tokens occurs in both sequences.
template <typename T>
bool share_shingle(const std::vector<T>& a, const std::vector<T>& b, std::size_t len) {
  if (a.size() < len || b.size() < len) return false;
  std::set<std::vector<T>> sa;
  for (std::size_t i = 0; i + len <= a.size(); ++i) sa.emplace(a.begin() + i, a.begin() + i + len);
  for (std::size_t i = 0; i + len <= b.size(); ++i)
    if (sa.count(std::vector<T>(b.begin() + i, b.begin() + i + len))) return true;
  return false;
}

struct GradCheck {
  double max_rel = 0;
  int entries = 0;
  int failures = 0;
};

/// Central differences of semlead::loss against semlead::gradient over every
/// parameter row the batch touches. The perturbed float values are read back
/// so the divisor is the step actually taken.
inline GradCheck finite_difference_check(semlead::EmbeddingModel& m, std::span<const semlead::TrainingPair> batch,
                                         double h, double tol) {
  auto g = semlead::gradient(m, batch);
  GradCheck out;
  auto probe = [&](std::span<float> row, const std::vector<double>& analytic) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      const float orig = row[k];
      row[k] = static_cast<float>(orig + h);
      const double xp = row[k];
      const double lp = semlead::loss(m, batch);
      row[k] = static_cast<float>(orig - h);
      const double xm = row[k];
      const double lm = semlead::loss(m, batch);
      row[k] = orig;
      const double numeric = (lp - lm) / (xp - xm);
      const double a = analytic[k];
      const double scale = std::max(std::abs(a), std::abs(numeric));
      const double rel = scale > 0 ? std::abs(a - numeric) / scale : 0.0;
      // Entries far below the loss scale carry no relative information.
      const bool ok = rel <= tol || std::abs(a - numeric) <= 1e-9;
      if (std::abs(a - numeric) > 1e-9) out.max_rel = std::max(out.max_rel, rel);
      ++out.entries;
      if (!ok) ++out.failures;
    }
  };
  for (const auto& [w, row] : g.base) probe(m.base(w), row);
  for (const auto& [w, row] : g.output) probe(m.output(w), row);
  for (const auto& [slot, row] : g.temporal) probe(m.temporal(slot), row);
  for (const auto& [slot, row] : g.source) probe(m.source(slot), row);
  return out;
}

/// Random 10-word, 3-bin, 2-source, 4-dim model with a random residual
/// sparsity pattern, plus a random batch over it.
inline semlead::EmbeddingModel toy_model(std::mt19937_64& rng, std::vector<semlead::TrainingPair>& batch) {
  constexpr int V = 10, T = 3, S = 2, D = 4;
  semlead::EmbeddingModel m(semlead::ModelKind::source_conditional, V, T, S, D);
  std::uniform_real_distribution<double> unit(-1.0, 1.0), coin(0.0, 1.0);
  for (int w = 0; w < V; ++w)
    for (int t = 0; t < T; ++t) {
      if (coin(rng) < 0.75) m.add_temporal_slot(w, t);
      for (int s = 0; s < S; ++s)
        if (coin(rng) < 0.6) m.add_source_slot(w, t, s);
    }
  for (auto* table : {&m.base_table(), &m.output_table(), &m.temporal_table(), &m.source_table()})
    for (auto& x : *table) x = static_cast<float>(0.7 * unit(rng));
  m.hyper.dims = D;
  m.hyper.l2_lambda = coin(rng) < 0.2 ? 0.0 : std::pow(10.0, -4.0 + 4.0 * coin(rng));

  batch.clear();
  const int pairs = 1 + static_cast<int>(rng() % 6);
  for (int p = 0; p < pairs; ++p) {
    semlead::TrainingPair tp;
    tp.center = static_cast<int>(rng() % V);
    tp.bin = static_cast<int>(rng() % T);
    tp.source = static_cast<int>(rng() % (S + 1)) - 1;
    tp.context = static_cast<int>(rng() % V);
    const int negs = 1 + static_cast<int>(rng() % 5);
    for (int n = 0; n < negs; ++n) tp.negatives.push_back(static_cast<int>(rng() % V));
    tp.weight = coin(rng) < 0.1 ? 0.0 : 0.5 + coin(rng);
    batch.push_back(tp);
  }
  if (std::all_of(batch.begin(), batch.end(), [](const auto& p) { return p.weight == 0; })) batch[0].weight = 1.0;
  return m;
}

}  // namespace oracle
