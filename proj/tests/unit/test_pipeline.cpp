#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <sys/wait.h>

#include "semlead/pipeline.hpp"
#include "semlead/synth.hpp"
#include "support/fixtures.hpp"

using namespace semlead;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Small corpus on disk plus a config that runs every stage in seconds.
RunConfig small_run(const fs::path& dir) {
  auto cfg = fixture::tiny_config();
  auto syn = generate(cfg, 21);
  const auto input = dir / "articles.jsonl";
  std::ofstream out(input);
  write_articles(out, syn.articles);
  out.close();

  RunConfig c;
  c.input = input;
  c.workdir = dir / "work";
  auto opt = fixture::synth_options(cfg);
  c.corpus = opt;
  c.embed.dims = 8;
  c.embed.epochs = 1;
  c.change.k = 5;
  c.filter.min_distinct_sources = 2;
  c.filter.max_zero_count_bins = 4;
  c.nulls.replicates = 3;
  return c;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SEMLEAD_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> stage_files(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) out[e.path().filename().string()] = slurp(e.path());
  return out;
}

}  // namespace

TEST_CASE("pipeline runs every stage and records the manifest") {
  auto dir = fixture::temp_dir("pipeline-run");
  StageContext ctx;
  ctx.config = small_run(dir);
  run_pipeline(ctx);
  Workspace ws(ctx.config.workdir);
  const auto& m = ws.manifest();
  for (const char* stage : {"ingest", "train.temporal", "changes", "train.source", "leadership", "network"}) {
    INFO(stage);
    REQUIRE(m["stages"].contains(stage));
    CHECK(m["stages"][stage].contains("seconds"));
    CHECK_FALSE(m["stages"][stage]["artifacts"].empty());
  }
  CHECK(m["config"]["corpus.bins"] == "4");
  CHECK(m["input"]["sha256"].get<std::string>().size() == 64);
  CHECK(m["seeds"]["null_replicates"].size() == 3);
  CHECK(fs::exists(ws.verified_pointer("network", "latest", "semlead network")));
}

TEST_CASE("network rerun is byte-identical") {
  auto dir = fixture::temp_dir("pipeline-rerun");
  StageContext ctx;
  ctx.config = small_run(dir);
  run_pipeline(ctx);
  auto before = stage_files(ctx.config.workdir / "network");
  run_network(ctx);
  auto after = stage_files(ctx.config.workdir / "network");
  CHECK(before == after);
}

TEST_CASE("missing and stale upstream artifacts are fatal") {
  auto dir = fixture::temp_dir("pipeline-stale");
  StageContext ctx;
  ctx.config = small_run(dir);
  CHECK_THROWS_AS(run_changes(ctx), Error);

  run_ingest(ctx);
  run_train(ctx, ModelKind::temporal);
  run_changes(ctx);
  run_train(ctx, ModelKind::source_conditional);

  // Retraining the temporal model makes the recorded changes stale.
  ctx.config.embed.epochs = 2;
  run_train(ctx, ModelKind::temporal);
  CHECK_THROWS_AS(run_leadership(ctx), KindMismatch);
  run_train(ctx, ModelKind::source_conditional);
  try {
    run_leadership(ctx);
    FAIL("expected a stale-artifact error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("semlead changes") != std::string::npos);
  }
  run_changes(ctx);
  CHECK_NOTHROW(run_leadership(ctx));

  // A damaged artifact is detected through its hash.
  Workspace ws(ctx.config.workdir);
  auto events = ws.verified("leadership", "events", "x");
  std::ofstream(events, std::ios::app) << "tampered\n";
  CHECK_THROWS_AS(run_network(ctx), Error);
  fs::remove(events);
  CHECK_THROWS_AS(run_network(ctx), Error);
}

TEST_CASE("CLI exit codes and kind contract") {
  auto dir = fixture::temp_dir("pipeline-cli");
  auto c = small_run(dir);
  auto conf = dir / "run.conf";
  {
    std::ofstream out(conf);
    write_config(out, c);
  }
  const std::string base = "--config " + conf.string();
  CHECK(run_cli(base + " ingest") == 0);
  CHECK(run_cli(base + " train --kind temporal") == 0);
  CHECK(run_cli(base + " changes") == 0);
  CHECK(run_cli(base + " leadership") == 1);
  CHECK(run_cli(base + " train --kind source") == 0);
  CHECK(run_cli(base + " leadership") == 0);
  CHECK(run_cli(base + " --stdout network") == 0);
  CHECK(run_cli(base + " --set no.such=1 network") == 1);
  CHECK(run_cli(base + " train --kind spatial") == 1);
  CHECK(run_cli("config --defaults") == 0);
  CHECK(run_cli("") == 1);
  CHECK(run_cli("--workdir " + (dir / "empty").string() + " network") == 1);
}

TEST_CASE("synth subcommand writes articles and truth") {
  auto dir = fixture::temp_dir("pipeline-synth");
  CHECK(run_cli("--workdir " + dir.string() + " synth --scenario no-change --seed 4") == 0);
  Workspace ws(dir);
  auto truth = load_ground_truth(ws.verified_pointer("synth", "latest-truth", "semlead synth"));
  CHECK(truth.scenario == "no-change");
  CHECK(fs::file_size(ws.verified_pointer("synth", "latest", "semlead synth")) > 0);
  CHECK(run_cli("--workdir " + dir.string() + " synth --scenario nope") == 1);
}
