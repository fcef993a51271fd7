#include <doctest.h>

#include <sstream>

#include "semlead/config.hpp"

using namespace semlead;

TEST_CASE("defaults") {
  RunConfig c;
  CHECK(c.corpus.bins == 10);
  CHECK(c.corpus.min_articles == 500);
  CHECK(c.corpus.vocab_cap == 50000);
  CHECK(c.corpus.min_count == 5);
  CHECK(c.corpus.shingle == 8);
  CHECK(c.embed.dims == 100);
  CHECK(c.embed.window == 5);
  CHECK(c.embed.l2_lambda == 1e-4);
  CHECK(c.embed.negatives == 5);
  CHECK(c.embed.noise_exponent == 0.75);
  CHECK(c.change.k == 25);
  CHECK(c.top_m == 500);
  CHECK(c.nulls.replicates == 100);
  CHECK(c.percentile == 95.0);
  CHECK(c.lead.epsilon == 1e-6);
  CHECK(c.pagerank.alpha == 0.85);
  c.finalize();
  CHECK(c.pagerank.beta < 0);

  auto d = describe_defaults();
  std::map<std::string, std::string> by_key;
  for (const auto& e : d) {
    CHECK_FALSE(e.description.empty());
    by_key[e.key] = e.default_value;
  }
  CHECK(by_key.at("corpus.bins") == "10");
  CHECK(by_key.at("lead.replicates") == "100");
  CHECK(std::stod(by_key.at("embed.l2_lambda")) == 1e-4);
  CHECK(by_key.at("network.alpha") == "0.85");
  CHECK(by_key.at("lead.null_statistic") == "max_pair");
}

TEST_CASE("parse key = value lines") {
  std::istringstream in(
      "# comment\n"
      "corpus.bins = 6\n"
      "embed.dims=16   # trailing comment\n"
      "\n"
      "lead.null_mode = full\n"
      "lead.null_statistic = tuple\n"
      "deterministic = false\n"
      "seed = 77\n");
  auto c = parse_config(in);
  CHECK(c.corpus.bins == 6);
  CHECK(c.embed.dims == 16);
  CHECK(c.nulls.mode == NullMode::full);
  CHECK(c.nulls.statistic == NullStatistic::tuple);
  CHECK_THROWS_AS(c.set("lead.null_statistic", "best"), Error);
  CHECK_FALSE(c.deterministic);
  c.finalize();
  CHECK(c.embed.seed == derive_seed(77, {2}));
  CHECK(c.nulls.seed == derive_seed(77, {3}));
}

TEST_CASE("bad input is fatal and names the line") {
  std::istringstream unknown("corpus.bins = 6\nno.such.key = 1\n");
  try {
    parse_config(unknown, "run.conf");
    FAIL("expected an error");
  } catch (const Error& e) {
    std::string msg = e.what();
    CHECK(msg.find("run.conf:2") != std::string::npos);
    CHECK(msg.find("no.such.key") != std::string::npos);
  }
  std::istringstream bad_number("embed.dims = twelve\n");
  CHECK_THROWS_AS(parse_config(bad_number), Error);
  std::istringstream no_eq("embed.dims 12\n");
  CHECK_THROWS_AS(parse_config(no_eq), Error);
  std::istringstream bad_bool("deterministic = maybe\n");
  CHECK_THROWS_AS(parse_config(bad_bool), Error);
}

TEST_CASE("write and re-read reproduces every entry") {
  RunConfig c;
  c.set("corpus.span_start", "1827-03-01");
  c.set("lead.percentile", "99");
  c.set("stoplist", "names.txt");
  std::stringstream ss;
  write_config(ss, c);
  auto back = parse_config(ss);
  CHECK(back.entries() == c.entries());
}
