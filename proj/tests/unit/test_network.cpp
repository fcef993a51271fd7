#include <doctest.h>

#include <cctype>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "semlead/network.hpp"
#include "support/oracles.hpp"

using namespace semlead;

namespace {

LeadershipNetwork make_net(int n) {
  LeadershipNetwork net;
  for (int i = 0; i < n; ++i) net.sources.push_back("s" + std::to_string(i));
  net.weights = DenseMatrix(n);
  return net;
}

LeadershipNetwork random_net(std::mt19937_64& rng, int n, double density) {
  auto net = make_net(n);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && u(rng) < density) net.weights(i, j) = 1 + static_cast<double>(rng() % 9);
  return net;
}

LeadEvent event(int leader, int follower, int word, bool accepted) {
  LeadEvent e;
  e.tuple = {word, leader, follower, 0, 1};
  e.accepted = accepted;
  return e;
}

// Recursive-descent check of the DOT subset: digraph ID { (node|edge) stmt; }
// with bracketed attribute lists whose keys are identifiers and values IDs.
class DotParser {
 public:
  explicit DotParser(std::string s) : s_(std::move(s)) {}

  bool parse() {
    if (!keyword("digraph")) return false;
    std::string name;
    if (!id(name) || !punct('{')) return false;
    while (true) {
      skip();
      if (pos_ < s_.size() && s_[pos_] == '}') break;
      std::string a, b;
      if (!id(a)) return false;
      skip();
      if (s_.compare(pos_, 2, "->") == 0) {
        pos_ += 2;
        if (!id(b)) return false;
        edges.emplace_back(a, b);
      } else if (a != "node") {
        nodes.push_back(a);
      }
      skip();
      if (pos_ < s_.size() && s_[pos_] == '[' && !attrs()) return false;
      if (!punct(';')) return false;
    }
    ++pos_;
    skip();
    return pos_ == s_.size();
  }

  std::vector<std::string> nodes;
  std::vector<std::pair<std::string, std::string>> edges;
  std::vector<std::pair<std::string, std::string>> attributes;

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool punct(char c) {
    skip();
    if (pos_ >= s_.size() || s_[pos_] != c) return false;
    ++pos_;
    return true;
  }
  bool keyword(const std::string& k) {
    skip();
    if (s_.compare(pos_, k.size(), k) != 0) return false;
    pos_ += k.size();
    return true;
  }
  bool id(std::string& out) {
    skip();
    out.clear();
    if (pos_ >= s_.size()) return false;
    if (s_[pos_] == '"') {
      ++pos_;
      while (pos_ < s_.size() && s_[pos_] != '"') {
        if (s_[pos_] == '\\') ++pos_;
        out += s_[pos_++];
      }
      if (pos_ >= s_.size()) return false;
      ++pos_;
      return true;
    }
    auto alpha = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
    if (alpha(s_[pos_])) {
      while (pos_ < s_.size() && (alpha(s_[pos_]) || std::isdigit(static_cast<unsigned char>(s_[pos_]))))
        out += s_[pos_++];
      return true;
    }
    // Numeral: [-]?(.[0-9]+ | [0-9]+(.[0-9]*)?)
    std::size_t start = pos_;
    if (s_[pos_] == '-') ++pos_;
    std::size_t digits = 0;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_, ++digits;
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_, ++digits;
    }
    if (digits == 0) return false;
    out = s_.substr(start, pos_ - start);
    return pos_ >= s_.size() || !alpha(s_[pos_]);
  }
  bool attrs() {
    if (!punct('[')) return false;
    while (true) {
      std::string k, v;
      if (!id(k) || !punct('=') || !id(v)) return false;
      attributes.emplace_back(k, v);
      skip();
      if (pos_ < s_.size() && s_[pos_] == ',') {
        ++pos_;
        continue;
      }
      return punct(']');
    }
  }

  std::string s_;
  std::size_t pos_ = 0;
};

}  // namespace

TEST_CASE("aggregate counts accepted events only") {
  std::vector<LeadEvent> ev{event(0, 1, 1, true), event(0, 1, 2, true), event(0, 1, 3, true),
                            event(1, 2, 4, false), event(2, 0, 5, true)};
  auto net = aggregate(ev, {"a", "b", "c"});
  CHECK(net.weights(0, 1) == 3);
  CHECK(net.weights(1, 2) == 0);
  CHECK(net.weights(2, 0) == 1);
  std::reverse(ev.begin(), ev.end());
  CHECK(aggregate(ev, {"a", "b", "c"}).weights == net.weights);
  std::vector<LeadEvent> none{event(0, 1, 1, false)};
  auto z = aggregate(none, {"a", "b"});
  for (double x : z.weights.data) CHECK(x == 0);
}

TEST_CASE("pagerank matches the dense solve") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    auto net = random_net(rng, 2 + static_cast<int>(rng() % 11), 0.4);
    auto pr = pagerank(net);
    auto ref = oracle::pagerank_solve(net.weights, 0.85, 0.15 / net.size());
    double sum = 0;
    for (std::size_t i = 0; i < pr.size(); ++i) {
      CHECK(std::abs(pr[i] - ref[i]) <= 1e-8);
      CHECK(pr[i] >= 0);
      sum += pr[i];
    }
    CHECK(std::abs(sum - 1) <= 1e-9);
  }
}

TEST_CASE("pagerank symmetry, scaling and relabeling") {
  auto sym = make_net(3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) sym.weights(i, j) = 2;
  for (double x : pagerank(sym)) CHECK(std::abs(x - 1.0 / 3) <= 1e-10);

  std::mt19937_64 rng(6);
  auto net = random_net(rng, 7, 0.5);
  auto pr = pagerank(net);
  auto scaled = net;
  for (double& x : scaled.weights.data) x *= 10;
  auto pr10 = pagerank(scaled);
  for (std::size_t i = 0; i < pr.size(); ++i) CHECK(std::abs(pr[i] - pr10[i]) <= 1e-12);

  std::vector<int> perm{3, 0, 6, 1, 5, 2, 4};
  auto relabeled = make_net(7);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) relabeled.weights(perm[i], perm[j]) = net.weights(i, j);
  auto prp = pagerank(relabeled);
  for (int i = 0; i < 7; ++i) CHECK(std::abs(prp[static_cast<std::size_t>(perm[i])] - pr[static_cast<std::size_t>(i)]) <= 1e-12);

  auto edge = make_net(2);
  edge.weights(0, 1) = 1;
  auto pe = pagerank(edge);
  auto re = oracle::pagerank_solve(edge.weights, 0.85, 0.075);
  CHECK(std::abs(pe[1] - re[1]) <= 1e-10);
  CHECK(pe[0] > pe[1]);

  PageRankOptions bad;
  bad.alpha = 1.0;
  CHECK_THROWS_AS(pagerank(edge, bad), Error);
  PageRankOptions tight;
  tight.max_iterations = 2;
  CHECK_THROWS_AS(pagerank(net, tight), Error);
}

TEST_CASE("hits closed forms") {
  auto edge = make_net(2);
  edge.weights(0, 1) = 1;
  auto h = hits(edge);
  CHECK(h.authority[0] == doctest::Approx(1.0));
  CHECK(h.authority[1] == 0.0);
  CHECK(h.hub[0] == 0.0);
  CHECK(h.hub[1] == doctest::Approx(1.0));

  auto star = make_net(4);
  for (int j = 1; j < 4; ++j) star.weights(0, j) = 1;
  auto hs = hits(star);
  CHECK(std::abs(hs.authority[0] - 1) <= 1e-12);
  CHECK(hs.hub[0] == 0.0);
  for (int j = 1; j < 4; ++j) CHECK(std::abs(hs.hub[static_cast<std::size_t>(j)] - 1 / std::sqrt(3.0)) <= 1e-12);

  CHECK_THROWS_AS(hits(make_net(3)), Error);
}

TEST_CASE("hits matches the dense eigensolver") {
  std::mt19937_64 rng(7);
  int compared = 0;
  for (int trial = 0; trial < 40; ++trial) {
    auto net = random_net(rng, 2 + static_cast<int>(rng() % 11), 0.5);
    if (std::all_of(net.weights.data.begin(), net.weights.data.end(), [](double x) { return x == 0; })) continue;
    auto [a_ref, h_ref] = oracle::hits_eig(net.weights);
    if (a_ref.gap < 1e-3) continue;  // leading eigenvector not unique
    auto h = hits(net);
    double na = 0, nh = 0;
    for (std::size_t i = 0; i < h.authority.size(); ++i) {
      CHECK(std::abs(h.authority[i] - a_ref.vec[i]) <= 1e-8);
      CHECK(std::abs(h.hub[i] - h_ref.vec[i]) <= 1e-8);
      CHECK(h.authority[i] >= 0);
      CHECK(h.hub[i] >= 0);
      na += h.authority[i] * h.authority[i];
      nh += h.hub[i] * h.hub[i];
    }
    CHECK(std::abs(na - 1) <= 1e-12);
    CHECK(std::abs(nh - 1) <= 1e-12);
    ++compared;
  }
  CHECK(compared >= 30);
}

TEST_CASE("edges round-trip and empty network") {
  std::mt19937_64 rng(8);
  auto net = random_net(rng, 5, 0.5);
  std::stringstream ss;
  write_edges(ss, net);
  auto back = read_edges(ss, net.sources);
  CHECK(back.weights == net.weights);

  std::stringstream empty;
  write_edges(empty, make_net(3));
  CHECK(empty.str() == "leader,follower,weight\n");

  std::vector<LeadEvent> ev{event(1, 0, 1, true), event(1, 0, 2, true), event(0, 2, 3, true)};
  auto agg = aggregate(ev, {"a", "b", "c"});
  std::stringstream e2;
  write_edges(e2, agg);
  CHECK(e2.str() == "leader,follower,weight\na,c,1\nb,a,2\n");
  std::stringstream e3(e2.str());
  CHECK(read_edges(e3, {"a", "b", "c"}).weights == agg.weights);

  std::stringstream loop("leader,follower,weight\na,a,1\n");
  CHECK_THROWS_AS(read_edges(loop, {"a", "b"}), Error);
}

TEST_CASE("dot export parses") {
  std::mt19937_64 rng(9);
  auto net = random_net(rng, 6, 0.5);
  net.sources[2] = "The \"Liberator\"";
  auto rep = centrality(net);
  std::stringstream ss;
  write_dot(ss, net, rep);
  DotParser p(ss.str());
  REQUIRE(p.parse());
  CHECK(p.nodes.size() == 6);
  CHECK(p.nodes[2] == "The \"Liberator\"");
  std::size_t nonzero = 0;
  for (double x : net.weights.data) nonzero += x != 0;
  CHECK(p.edges.size() == nonzero);

  auto empty = make_net(2);
  std::stringstream e;
  write_dot(e, empty, centrality(empty));
  DotParser pe(e.str());
  CHECK(pe.parse());
  CHECK(pe.edges.empty());
}

TEST_CASE("sankey ordering") {
  auto net = make_net(3);
  net.weights(1, 0) = 3;
  net.weights(2, 0) = 3;
  net.weights(0, 2) = 1;
  std::stringstream ss;
  write_sankey(ss, net);
  auto j = nlohmann::json::parse(ss.str());
  REQUIRE(j["left"].size() == 3);
  CHECK(j["left"][0]["name"] == "s1");
  CHECK(j["left"][1]["name"] == "s2");
  CHECK(j["left"][2]["name"] == "s0");
  CHECK(j["right"][0]["name"] == "s0");
  CHECK(j["right"][0]["total"] == 6);
  CHECK(j["links"].size() == 3);
}

TEST_CASE("centrality report") {
  auto net = make_net(3);
  net.weights(0, 1) = 1;
  net.weights(0, 2) = 1;
  auto rep = centrality(net);
  CHECK(rep.authority[0] == doctest::Approx(1.0));
  std::stringstream ss;
  write_report(ss, rep);
  CHECK(ss.str().rfind("source,pagerank,authority,hub\ns0,", 0) == 0);
  auto zero = centrality(make_net(2));
  CHECK(zero.authority == std::vector<double>{0, 0});
  CHECK(zero.pagerank[0] == doctest::Approx(0.5));
}
