#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "semlead/lead.hpp"

namespace semlead {

/// Row-major square matrix.
struct DenseMatrix {
  int n = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  explicit DenseMatrix(int size) : n(size), data(static_cast<std::size_t>(size) * static_cast<std::size_t>(size), 0.0) {}
  double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * n + j]; }
  double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * n + j]; }
  bool operator==(const DenseMatrix&) const = default;
};

/// weights(i, j) counts accepted events in which source i leads source j.
struct LeadershipNetwork {
  std::vector<std::string> sources;
  DenseMatrix weights;

  int size() const { return weights.n; }
};

LeadershipNetwork aggregate(std::span<const LeadEvent> events, std::vector<std::string> sources);

struct PageRankOptions {
  double alpha = 0.85;
  double beta = -1;  // negative means (1 - alpha) / |S|
  double tolerance = 1e-12;
  int max_iterations = 10000;
};

/// Power iteration on PR = alpha * M * PR + beta, where M normalizes each
/// column of the weight matrix to sum to one and an all-zero column becomes
/// uniform. Throws semlead::Error with the final residual on non-convergence.
std::vector<double> pagerank(const LeadershipNetwork& net, const PageRankOptions& options = {});

struct HitsResult {
  std::vector<double> authority;  // high for sources leading strong hubs
  std::vector<double> hub;        // high for sources following strong authorities
  int iterations = 0;
};

/// a = W h, h = W^T a with Euclidean normalization, started from the uniform
/// unit vector. Throws on an all-zero matrix or non-convergence.
HitsResult hits(const LeadershipNetwork& net, double tolerance = 1e-12, int max_iterations = 100000);

struct CentralityReport {
  std::vector<std::string> sources;
  std::vector<double> pagerank, authority, hub;
};

/// HITS entries are zero when the network has no edges.
CentralityReport centrality(const LeadershipNetwork& net, const PageRankOptions& options = {});

/// `leader,follower,weight` for every nonzero entry, row-major.
void write_edges(std::ostream& out, const LeadershipNetwork& net);
LeadershipNetwork read_edges(std::istream& in, std::vector<std::string> sources);
void write_dot(std::ostream& out, const LeadershipNetwork& net, const CentralityReport& report);
/// Leaders on the left and followers on the right, each ordered by
/// descending total weight (ties by name), plus the weighted links.
void write_sankey(std::ostream& out, const LeadershipNetwork& net);
/// `source,pagerank,authority,hub`.
void write_report(std::ostream& out, const CentralityReport& report);

}  // namespace semlead
