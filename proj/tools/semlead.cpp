#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "semlead/common.hpp"
#include "semlead/config.hpp"
#include "semlead/embed.hpp"
#include "semlead/pipeline.hpp"

namespace {

semlead::RunConfig base_config(const std::string& config_path) {
  semlead::RunConfig c = config_path.empty() ? semlead::RunConfig{} : semlead::load_config(config_path);
  if (const char* w = std::getenv("SEMLEAD_WORKDIR"); w && *w) c.workdir = w;
  if (const char* t = std::getenv("SEMLEAD_THREADS"); t && *t) c.set("threads", t);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semlead: semantic change and leadership across sources"};
  app.set_version_flag("--version", std::string(semlead::kVersion));
  app.require_subcommand(1);

  std::string config_path, workdir, input;
  int threads = 0;
  bool to_stdout = false;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "key=value configuration file");
  app.add_option("--workdir", workdir, "work directory (overrides config and SEMLEAD_WORKDIR)");
  app.add_option("--threads", threads, "worker threads (overrides config and SEMLEAD_THREADS)");
  app.add_option("--set", overrides, "extra key=value assignment, may repeat");
  app.add_flag("--stdout", to_stdout, "also write machine-readable results to standard output");

  auto* ingest = app.add_subcommand("ingest", "normalize, deduplicate, bin and encode articles");
  ingest->add_option("--input", input, "article file (JSON lines)");
  auto* train = app.add_subcommand("train", "train an embedding model");
  std::string kind = "temporal";
  train->add_option("--kind", kind, "temporal or source")->check(CLI::IsMember({"temporal", "source"}));
  app.add_subcommand("changes", "rank and filter semantic changes");
  app.add_subcommand("leadership", "score lead events against randomized corpora");
  app.add_subcommand("network", "aggregate accepted events and compute centralities");
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus with ground truth");
  std::string scenario;
  std::uint64_t synth_seed = 1;
  synth->add_option("--scenario", scenario, "scenario name")->required();
  synth->add_option("--seed", synth_seed, "generator seed");
  auto* pipeline = app.add_subcommand("pipeline", "run every stage in order");
  pipeline->add_option("--input", input, "article file (JSON lines)");
  std::string pipeline_scenario;
  pipeline->add_option("--scenario", pipeline_scenario, "generate this synthetic scenario and use it as input");
  pipeline->add_option("--seed", synth_seed, "generator seed for --scenario");
  auto* config = app.add_subcommand("config", "inspect configuration");
  bool show_defaults = false;
  config->add_flag("--defaults", show_defaults, "print every key with its default and meaning");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (config->parsed()) {
      if (show_defaults) {
        for (const auto& k : semlead::describe_defaults())
          std::cout << k.key << " = " << k.default_value << "\n    " << k.description << '\n';
      } else {
        semlead::write_config(std::cout, base_config(config_path));
      }
      return 0;
    }

    semlead::StageContext ctx;
    ctx.config = base_config(config_path);
    for (const auto& kv : overrides) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw semlead::Error("--set expects key=value, got '" + kv + "'");
      ctx.config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!workdir.empty()) ctx.config.workdir = workdir;
    if (threads > 0) ctx.config.threads = threads;
    if (!input.empty()) ctx.config.input = input;
    ctx.log = [](const std::string& msg) { std::cerr << msg << '\n'; };
    if (to_stdout) ctx.out = &std::cout;

    if (ingest->parsed()) semlead::run_ingest(ctx);
    else if (train->parsed()) semlead::run_train(ctx, semlead::parse_model_kind(kind));
    else if (app.got_subcommand("changes")) semlead::run_changes(ctx);
    else if (app.got_subcommand("leadership")) semlead::run_leadership(ctx);
    else if (app.got_subcommand("network")) semlead::run_network(ctx);
    else if (synth->parsed()) semlead::run_synth(ctx, scenario, synth_seed, false);
    else if (pipeline->parsed()) {
      if (!pipeline_scenario.empty()) semlead::run_synth(ctx, pipeline_scenario, synth_seed, true);
      semlead::run_pipeline(ctx);
    }
    return 0;
  } catch (const semlead::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const semlead::DivergenceError& e) {
    std::cerr << "error: " << e.what() << " (try a smaller embed.learning_rate)\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  } catch (...) {
    std::cerr << "internal error\n";
    return 2;
  }
}
