#include "semlead/network.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "semlead/common.hpp"
#include "semlead/csv.hpp"

namespace semlead {

LeadershipNetwork aggregate(std::span<const LeadEvent> events, std::vector<std::string> sources) {
  LeadershipNetwork net;
  const int S = static_cast<int>(sources.size());
  net.sources = std::move(sources);
  net.weights = DenseMatrix(S);
  for (const auto& e : events) {
    if (!e.accepted) continue;
    const auto& t = e.tuple;
    if (t.leader < 0 || t.leader >= S || t.follower < 0 || t.follower >= S)
      throw Error("aggregate: event source out of range");
    if (t.leader == t.follower) throw Error("aggregate: event with identical leader and follower");
    net.weights(t.leader, t.follower) += 1.0;
  }
  return net;
}

std::vector<double> pagerank(const LeadershipNetwork& net, const PageRankOptions& options) {
  const int S = net.size();
  if (S == 0) throw Error("pagerank: empty network");
  if (!(options.alpha > 0 && options.alpha < 1)) throw Error("pagerank: alpha must be in (0, 1)");
  const double beta = options.beta < 0 ? (1.0 - options.alpha) / S : options.beta;
  const auto& A = net.weights;

  // Column-stochastic transition matrix.
  DenseMatrix M(S);
  for (int j = 0; j < S; ++j) {
    double col = 0;
    for (int i = 0; i < S; ++i) {
      if (A(i, j) < 0) throw Error("pagerank: negative weight");
      col += A(i, j);
    }
    for (int i = 0; i < S; ++i) M(i, j) = col > 0 ? A(i, j) / col : 1.0 / S;
  }

  std::vector<double> pr(static_cast<std::size_t>(S), 1.0 / S), next(static_cast<std::size_t>(S));
  double residual = 0;
  for (int it = 0; it < options.max_iterations; ++it) {
    for (int i = 0; i < S; ++i) {
      double s = 0;
      for (int j = 0; j < S; ++j) s += M(i, j) * pr[static_cast<std::size_t>(j)];
      next[static_cast<std::size_t>(i)] = options.alpha * s + beta;
    }
    residual = 0;
    for (int i = 0; i < S; ++i) residual += std::abs(next[static_cast<std::size_t>(i)] - pr[static_cast<std::size_t>(i)]);
    pr.swap(next);
    if (residual < options.tolerance) return pr;
  }
  std::ostringstream msg;
  msg << "pagerank did not converge after " << options.max_iterations << " iterations (residual " << residual << ")";
  throw Error(msg.str());
}

namespace {

double normalize(std::vector<double>& v) {
  double n = 0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  if (n > 0)
    for (double& x : v) x /= n;
  return n;
}

}  // namespace

HitsResult hits(const LeadershipNetwork& net, double tolerance, int max_iterations) {
  const int S = net.size();
  const auto& A = net.weights;
  bool any = false;
  for (double x : A.data) {
    if (x < 0) throw Error("hits: negative weight");
    any = any || x > 0;
  }
  if (!any) throw Error("hits: the network has no edges");

  const auto n = static_cast<std::size_t>(S);
  HitsResult r;
  r.hub.assign(n, 1.0 / std::sqrt(static_cast<double>(S)));
  r.authority.assign(n, 0.0);
  std::vector<double> a(n), h(n);
  double residual = 0;
  for (int it = 1; it <= max_iterations; ++it) {
    for (int i = 0; i < S; ++i) {
      double s = 0;
      for (int j = 0; j < S; ++j) s += A(i, j) * r.hub[static_cast<std::size_t>(j)];
      a[static_cast<std::size_t>(i)] = s;
    }
    normalize(a);
    for (int j = 0; j < S; ++j) {
      double s = 0;
      for (int i = 0; i < S; ++i) s += A(i, j) * a[static_cast<std::size_t>(i)];
      h[static_cast<std::size_t>(j)] = s;
    }
    normalize(h);
    residual = 0;
    for (std::size_t i = 0; i < n; ++i)
      residual += std::abs(a[i] - r.authority[i]) + std::abs(h[i] - r.hub[i]);
    r.authority = a;
    r.hub = h;
    r.iterations = it;
    if (residual < tolerance) return r;
  }
  std::ostringstream msg;
  msg << "hits did not converge after " << max_iterations << " iterations (residual " << residual << ")";
  throw Error(msg.str());
}

CentralityReport centrality(const LeadershipNetwork& net, const PageRankOptions& options) {
  CentralityReport rep;
  rep.sources = net.sources;
  rep.pagerank = pagerank(net, options);
  const bool any = std::any_of(net.weights.data.begin(), net.weights.data.end(), [](double x) { return x > 0; });
  if (any) {
    auto h = hits(net);
    rep.authority = std::move(h.authority);
    rep.hub = std::move(h.hub);
  } else {
    rep.authority.assign(net.sources.size(), 0.0);
    rep.hub.assign(net.sources.size(), 0.0);
  }
  return rep;
}

void write_edges(std::ostream& out, const LeadershipNetwork& net) {
  out << "leader,follower,weight\n";
  for (int i = 0; i < net.size(); ++i)
    for (int j = 0; j < net.size(); ++j)
      if (net.weights(i, j) != 0)
        out << csv::field(net.sources[static_cast<std::size_t>(i)]) << ','
            << csv::field(net.sources[static_cast<std::size_t>(j)]) << ',' << csv::number(net.weights(i, j)) << '\n';
}

LeadershipNetwork read_edges(std::istream& in, std::vector<std::string> sources) {
  LeadershipNetwork net;
  const int S = static_cast<int>(sources.size());
  net.sources = std::move(sources);
  net.weights = DenseMatrix(S);
  auto index = [&](const std::string& name) {
    auto it = std::find(net.sources.begin(), net.sources.end(), name);
    if (it == net.sources.end()) throw Error("edges: unknown source '" + name + "'");
    return static_cast<int>(it - net.sources.begin());
  };
  for (const auto& row : csv::read(in, {"leader", "follower", "weight"}, "edges")) {
    const int i = index(row[0]), j = index(row[1]);
    const double w = csv::to_double(row[2], "edges weight");
    if (i == j) throw Error("edges: self loop on '" + row[0] + "'");
    if (!(w >= 0)) throw Error("edges: negative weight");
    net.weights(i, j) += w;
  }
  return net;
}

namespace {

std::string dot_id(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_dot(std::ostream& out, const LeadershipNetwork& net, const CentralityReport& report) {
  out << "digraph leadership {\n";
  out << "  node [shape=circle];\n";
  const double max_pr = report.pagerank.empty() ? 1.0 : *std::max_element(report.pagerank.begin(), report.pagerank.end());
  for (int i = 0; i < net.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double size = 0.5 + 1.5 * (max_pr > 0 ? report.pagerank[k] / max_pr : 0.0);
    out << "  " << dot_id(net.sources[k]) << " [pagerank=" << dot_id(csv::number(report.pagerank[k]))
        << ", authority=" << dot_id(csv::number(report.authority[k])) << ", hub=" << dot_id(csv::number(report.hub[k]))
        << ", width=" << dot_id(csv::number(size)) << "];\n";
  }
  for (int i = 0; i < net.size(); ++i)
    for (int j = 0; j < net.size(); ++j)
      if (net.weights(i, j) != 0)
        out << "  " << dot_id(net.sources[static_cast<std::size_t>(i)]) << " -> "
            << dot_id(net.sources[static_cast<std::size_t>(j)]) << " [weight=" << dot_id(csv::number(net.weights(i, j)))
            << ", label=" << dot_id(csv::number(net.weights(i, j))) << "];\n";
  out << "}\n";
}

void write_sankey(std::ostream& out, const LeadershipNetwork& net) {
  const int S = net.size();
  std::vector<double> led(static_cast<std::size_t>(S), 0), followed(static_cast<std::size_t>(S), 0);
  for (int i = 0; i < S; ++i)
    for (int j = 0; j < S; ++j) {
      led[static_cast<std::size_t>(i)] += net.weights(i, j);
      followed[static_cast<std::size_t>(j)] += net.weights(i, j);
    }
  auto order = [&](const std::vector<double>& total) {
    std::vector<int> idx(static_cast<std::size_t>(S));
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
      const auto ka = static_cast<std::size_t>(a), kb = static_cast<std::size_t>(b);
      return total[ka] != total[kb] ? total[ka] > total[kb] : net.sources[ka] < net.sources[kb];
    });
    nlohmann::json nodes = nlohmann::json::array();
    for (int i : idx)
      nodes.push_back({{"name", net.sources[static_cast<std::size_t>(i)]}, {"total", total[static_cast<std::size_t>(i)]}});
    return std::pair{idx, nodes};
  };
  auto [left_idx, left] = order(led);
  auto [right_idx, right] = order(followed);
  nlohmann::json links = nlohmann::json::array();
  for (int i : left_idx)
    for (int j : right_idx)
      if (net.weights(i, j) != 0)
        links.push_back({{"leader", net.sources[static_cast<std::size_t>(i)]},
                         {"follower", net.sources[static_cast<std::size_t>(j)]},
                         {"weight", net.weights(i, j)}});
  nlohmann::json doc = {{"left", left}, {"right", right}, {"links", links}};
  out << doc.dump(2) << '\n';
}

void write_report(std::ostream& out, const CentralityReport& report) {
  out << "source,pagerank,authority,hub\n";
  for (std::size_t i = 0; i < report.sources.size(); ++i)
    out << csv::field(report.sources[i]) << ',' << csv::number(report.pagerank[i]) << ','
        << csv::number(report.authority[i]) << ',' << csv::number(report.hub[i]) << '\n';
}

}  // namespace semlead
