#include "semlead/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "semlead/change.hpp"
#include "semlead/common.hpp"
#include "semlead/corpus.hpp"
#include "semlead/hash.hpp"
#include "semlead/lead.hpp"
#include "semlead/network.hpp"
#include "semlead/synth.hpp"

namespace fs = std::filesystem;

namespace semlead {

namespace {

std::string dir_of(const std::string& stage) { return stage.substr(0, stage.find('.')); }

}  // namespace

Workspace::Workspace(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw Error("cannot create work directory " + root_.string() + ": " + ec.message());
  const auto path = root_ / "manifest.json";
  if (fs::exists(path)) {
    try {
      std::ifstream in(path);
      manifest_ = nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw Error("corrupt manifest " + path.string() + ": " + e.what());
    }
  }
  if (!manifest_.is_object()) manifest_ = nlohmann::ordered_json::object();
  manifest_["tool"] = "semlead";
  manifest_["version"] = kVersion;
  if (!manifest_.contains("stages")) manifest_["stages"] = nlohmann::ordered_json::object();
}

fs::path Workspace::stage_dir(const std::string& stage) const { return root_ / dir_of(stage); }

void Workspace::begin_stage(const std::string& stage) {
  manifest_["stages"][stage] = {{"artifacts", nlohmann::ordered_json::object()},
                                {"upstream", nlohmann::ordered_json::object()}};
}

ArtifactRef Workspace::store(const std::string& stage, const std::string& label, const std::string& stem,
                             const std::string& ext, const std::function<void(const fs::path&)>& writer) {
  const auto dir = stage_dir(stage);
  fs::create_directories(dir);
  const auto tmp = dir / ("." + stem + ".tmp");
  writer(tmp);
  ArtifactRef ref;
  ref.sha256 = sha256_file(tmp);
  ref.file = stem + "-" + ref.sha256.substr(0, 16) + ext;
  fs::rename(tmp, dir / ref.file);
  manifest_["stages"][stage]["artifacts"][label] = {{"file", ref.file}, {"sha256", ref.sha256}};
  return ref;
}

ArtifactRef Workspace::store_text(const std::string& stage, const std::string& label, const std::string& stem,
                                  const std::string& ext, const std::string& content) {
  return store(stage, label, stem, ext, [&](const fs::path& p) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + p.string());
    out << content;
  });
}

void Workspace::set_pointer(const std::string& stage, const std::string& name, const std::string& file) {
  const auto p = stage_dir(stage) / name;
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw Error("cannot write " + p.string());
  out << file << '\n';
}

std::optional<std::string> Workspace::pointer(const std::string& stage, const std::string& name) const {
  const auto p = stage_dir(stage) / name;
  if (!fs::exists(p)) return std::nullopt;
  std::ifstream in(p);
  std::string file;
  std::getline(in, file);
  if (file.empty()) return std::nullopt;
  return file;
}

std::optional<ArtifactRef> Workspace::artifact(const std::string& stage, const std::string& label) const {
  const auto& stages = manifest_["stages"];
  if (!stages.contains(stage)) return std::nullopt;
  const auto& arts = stages[stage]["artifacts"];
  if (!arts.contains(label)) return std::nullopt;
  return ArtifactRef{arts[label]["file"].get<std::string>(), arts[label]["sha256"].get<std::string>()};
}

fs::path Workspace::verified(const std::string& stage, const std::string& label, const std::string& rerun) const {
  auto ref = artifact(stage, label);
  if (!ref) throw Error("no " + label + " artifact from stage " + stage + "; run `" + rerun + "` first");
  const auto path = stage_dir(stage) / ref->file;
  if (!fs::exists(path)) throw Error(path.string() + " is missing; rerun `" + rerun + "`");
  if (sha256_file(path) != ref->sha256)
    throw Error(path.string() + " no longer matches the manifest; rerun `" + rerun + "`");
  return path;
}

fs::path Workspace::verified_pointer(const std::string& stage, const std::string& name,
                                     const std::string& rerun) const {
  auto file = pointer(stage, name);
  if (!file) throw Error("no " + stage + "/" + name + " artifact; run `" + rerun + "` first");
  for (const auto& [key, rec] : manifest_["stages"].items()) {
    if (dir_of(key) != stage) continue;
    for (const auto& [label, art] : rec["artifacts"].items())
      if (art["file"].get<std::string>() == *file) return verified(key, label, rerun);
  }
  throw Error(stage + "/" + name + " names " + *file + ", which the manifest does not record; rerun `" + rerun + "`");
}

void Workspace::set_upstream(const std::string& stage,
                             const std::vector<std::pair<std::string, std::string>>& labels) {
  auto& up = manifest_["stages"][stage]["upstream"];
  for (const auto& [s, label] : labels) {
    auto ref = artifact(s, label);
    if (!ref) throw Error("internal: upstream artifact " + s + "/" + label + " not recorded");
    up[s + "/" + label] = ref->sha256;
  }
}

void Workspace::require_fresh(const std::string& stage, const std::string& rerun) const {
  const auto& stages = manifest_["stages"];
  if (!stages.contains(stage)) return;
  for (const auto& [key, sha] : stages[stage]["upstream"].items()) {
    const auto slash = key.find('/');
    auto ref = artifact(key.substr(0, slash), key.substr(slash + 1));
    if (!ref || ref->sha256 != sha.get<std::string>())
      throw Error("stage " + stage + " was built from an older " + key + "; rerun `" + rerun + "`");
  }
}

void Workspace::save_manifest() const {
  const auto path = root_ / "manifest.json";
  const auto tmp = root_ / ".manifest.json.tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << manifest_.dump(2) << '\n';
  }
  fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// stages

namespace {

class StageTimer {
 public:
  StageTimer(Workspace& ws, std::string stage) : ws_(ws), stage_(std::move(stage)), t0_(std::chrono::steady_clock::now()) {}
  void finish() {
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    ws_.manifest()["stages"][stage_]["seconds"] = s;
    ws_.save_manifest();
  }

 private:
  Workspace& ws_;
  std::string stage_;
  std::chrono::steady_clock::time_point t0_;
};

void record_config(Workspace& ws, const RunConfig& c) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : c.entries()) j[k] = v;
  ws.manifest()["config"] = j;
  ws.manifest()["seeds"]["master"] = c.seed;
  ws.manifest()["seeds"]["corpus"] = c.corpus.seed;
  ws.manifest()["seeds"]["embed"] = c.embed.seed;
  ws.manifest()["seeds"]["null"] = c.nulls.seed;
}

int train_threads(const RunConfig& c) { return c.deterministic ? 1 : c.threads; }

std::string model_stage(ModelKind kind) {
  return kind == ModelKind::temporal ? "train.temporal" : "train.source";
}

std::string train_cmd(ModelKind kind) {
  return std::string("semlead train --kind ") + std::string(to_string(kind));
}

EncodedCorpus load_verified_corpus(Workspace& ws) {
  return load_corpus(ws.verified("ingest", "corpus", "semlead ingest"));
}

EmbeddingModel load_latest_model(Workspace& ws, const std::string& pointer, ModelKind expected) {
  auto model = load_model(ws.verified_pointer("train", pointer, train_cmd(expected)));
  require_kind(model, expected);
  ws.require_fresh(model_stage(expected), train_cmd(expected));
  return model;
}

}  // namespace

void run_ingest(StageContext& ctx) {
  auto& c = ctx.config;
  c.finalize();
  if (c.input.empty()) throw Error("ingest: no input file (set input= in the config or pass --input)");
  Workspace ws(c.workdir);
  StageTimer timer(ws, "ingest");
  ws.begin_stage("ingest");
  record_config(ws, c);

  auto result = ingest(c.input);
  for (const auto& w : result.warnings)
    ctx.log(c.input.string() + ":" + std::to_string(w.line) + ": skipped: " + w.message);
  std::map<std::string, std::string> grouping;
  if (!c.grouping.empty()) grouping = load_grouping(c.grouping);
  SubstitutionTable subs;
  if (!c.substitutions.empty()) subs = load_substitutions(c.substitutions);
  auto corpus = prepare_corpus(result.articles, c.corpus, grouping, c.substitutions.empty() ? nullptr : &subs);

  ws.manifest()["input"] = {{"path", c.input.string()}, {"sha256", sha256_file(c.input)}};
  auto ref = ws.store("ingest", "corpus", "corpus", ".bin", [&](const fs::path& p) { save_corpus(corpus, p); });
  ws.set_pointer("ingest", "latest", ref.file);
  ws.manifest()["stages"]["ingest"]["info"] = {{"articles", result.articles.size()},
                                               {"skipped_lines", result.warnings.size()},
                                               {"documents", corpus.docs.size()},
                                               {"tokens", corpus.num_tokens()},
                                               {"sources", corpus.sources.names},
                                               {"vocabulary", corpus.vocab.size()}};
  ctx.log("ingest: " + std::to_string(corpus.docs.size()) + " documents, " + std::to_string(corpus.num_tokens()) +
          " tokens, " + std::to_string(corpus.sources.size()) + " sources, vocabulary " +
          std::to_string(corpus.vocab.size()));
  timer.finish();
}

void run_train(StageContext& ctx, ModelKind kind) {
  auto& c = ctx.config;
  c.finalize();
  Workspace ws(c.workdir);
  auto corpus = load_verified_corpus(ws);
  const auto stage = model_stage(kind);
  StageTimer timer(ws, stage);

  EmbeddingModel model;
  std::vector<std::pair<std::string, std::string>> upstream = {{"ingest", "corpus"}};
  if (kind == ModelKind::source_conditional && c.source_warm_start) {
    auto temporal = load_latest_model(ws, "latest-temporal", ModelKind::temporal);
    check_vocab(temporal, corpus.vocab);
    model = warm_start(temporal, corpus.vocab, kind, /*copy_temporal=*/true);
    model.hyper = c.embed;
    upstream.push_back({"train.temporal", "model"});
  } else {
    model = init_model(corpus.vocab, kind, c.embed);
  }
  ws.begin_stage(stage);
  record_config(ws, c);
  TrainOptions opt;
  opt.threads = train_threads(c);
  auto report = train(model, corpus.docs, corpus.vocab, opt);

  auto ref = ws.store(stage, "model", std::string("model-") + std::string(to_string(kind)), ".bin",
                      [&](const fs::path& p) { save_model(model, p); });
  ws.set_upstream(stage, upstream);
  ws.set_pointer("train", "latest", ref.file);
  ws.set_pointer("train", std::string("latest-") + std::string(to_string(kind)), ref.file);
  ws.manifest()["stages"][stage]["info"] = {{"kind", to_string(kind)},
                                            {"final_loss", report.final_loss},
                                            {"pairs_per_epoch", report.pairs},
                                            {"threads", opt.threads}};
  ctx.log("train: " + std::string(to_string(kind)) + " model, final loss " + std::to_string(report.final_loss));
  timer.finish();
}

void run_changes(StageContext& ctx) {
  auto& c = ctx.config;
  c.finalize();
  Workspace ws(c.workdir);
  auto corpus = load_verified_corpus(ws);
  auto model = load_latest_model(ws, "latest-temporal", ModelKind::temporal);
  check_vocab(model, corpus.vocab);
  StageTimer timer(ws, "changes");
  ws.begin_stage("changes");
  record_config(ws, c);

  auto ranked = rank_changes(model, corpus.vocab, c.change, c.threads);
  auto rules = c.filter;
  if (!c.stoplist.empty()) rules.stoplist = load_stoplist(c.stoplist);
  std::vector<FilterAuditEntry> audit;
  auto kept = filter_changes(ranked, corpus.vocab, rules, c.top_m, &audit);

  std::ostringstream all, filtered, log;
  write_changes(all, ranked, corpus.vocab);
  write_changes(filtered, kept, corpus.vocab);
  write_filter_audit(log, audit);
  ws.store_text("changes", "ranked", "ranked", ".csv", all.str());
  ws.store_text("changes", "audit", "filter-audit", ".csv", log.str());
  auto ref = ws.store_text("changes", "changes", "changes", ".csv", filtered.str());
  ws.set_pointer("changes", "latest", ref.file);
  ws.set_upstream("changes", {{"ingest", "corpus"}, {"train.temporal", "model"}});
  ws.manifest()["stages"]["changes"]["info"] = {{"scored_words", ranked.size()},
                                                {"filtered_out", audit.size()},
                                                {"kept", kept.size()},
                                                {"measure", "second-order neighbor profile"}};
  if (ctx.out) *ctx.out << filtered.str();
  ctx.log("changes: " + std::to_string(ranked.size()) + " words scored, " + std::to_string(kept.size()) + " kept");
  timer.finish();
}

void run_leadership(StageContext& ctx) {
  auto& c = ctx.config;
  c.finalize();
  Workspace ws(c.workdir);
  auto corpus = load_verified_corpus(ws);
  auto model = load_model(ws.verified_pointer("train", "latest", train_cmd(ModelKind::source_conditional)));
  require_kind(model, ModelKind::source_conditional);
  ws.require_fresh("train.source", train_cmd(ModelKind::source_conditional));
  check_vocab(model, corpus.vocab);
  ws.require_fresh("changes", "semlead changes");
  std::vector<ChangeRecord> changes;
  {
    std::ifstream in(ws.verified("changes", "changes", "semlead changes"));
    changes = read_changes(in, corpus.vocab);
  }
  StageTimer timer(ws, "leadership");
  ws.begin_stage("leadership");
  record_config(ws, c);

  auto nulls = c.nulls;
  nulls.log = ctx.log;
  auto report = significant_events(changes, model, corpus.docs, corpus.vocab, c.lead, nulls, c.percentile);

  std::ostringstream events;
  write_events(events, report.events, corpus.vocab, corpus.sources);
  auto ref = ws.store_text("leadership", "events", "events", ".csv", events.str());
  if (c.dump_nulls) {
    std::ostringstream dump;
    write_null_scores(dump, report.events, corpus.vocab, corpus.sources);
    ws.store_text("leadership", "nulls", "nulls", ".csv", dump.str());
  }
  ws.set_pointer("leadership", "latest", ref.file);
  ws.set_upstream("leadership", {{"ingest", "corpus"}, {"train.source", "model"}, {"changes", "changes"}});
  std::size_t accepted = 0;
  for (const auto& e : report.events) accepted += e.accepted ? 1 : 0;
  ws.manifest()["seeds"]["null_replicates"] = report.seeds;
  ws.manifest()["stages"]["leadership"]["info"] = {{"evaluated", report.events.size()},
                                                   {"accepted", accepted},
                                                   {"replicates", c.nulls.replicates},
                                                   {"null_mode", to_string(c.nulls.mode)},
                                                   {"null_statistic", to_string(c.nulls.statistic)},
                                                   {"randomize", to_string(c.nulls.randomize)},
                                                   {"intervals", "all adjacent"},
                                                   {"undefined_null_draws", report.undefined_draws},
                                                   {"retries", report.retries}};
  if (ctx.out) *ctx.out << events.str();
  ctx.log("leadership: " + std::to_string(report.events.size()) + " events evaluated, " + std::to_string(accepted) +
          " accepted");
  timer.finish();
}

void run_network(StageContext& ctx) {
  auto& c = ctx.config;
  c.finalize();
  Workspace ws(c.workdir);
  auto corpus = load_verified_corpus(ws);
  ws.require_fresh("leadership", "semlead leadership");
  std::vector<LeadEvent> events;
  {
    std::ifstream in(ws.verified("leadership", "events", "semlead leadership"));
    events = read_events(in, corpus.vocab, corpus.sources);
  }
  StageTimer timer(ws, "network");
  ws.begin_stage("network");
  record_config(ws, c);

  auto net = aggregate(events, corpus.sources.names);
  auto rep = centrality(net, c.pagerank);
  std::ostringstream edges, report, dot, sankey;
  write_edges(edges, net);
  write_report(report, rep);
  write_dot(dot, net, rep);
  write_sankey(sankey, net);
  ws.store_text("network", "edges", "edges", ".csv", edges.str());
  auto ref = ws.store_text("network", "report", "centrality", ".csv", report.str());
  ws.store_text("network", "dot", "network", ".dot", dot.str());
  ws.store_text("network", "sankey", "sankey", ".json", sankey.str());
  ws.set_pointer("network", "latest", ref.file);
  ws.set_upstream("network", {{"ingest", "corpus"}, {"leadership", "events"}});
  if (ctx.out) *ctx.out << report.str();
  ctx.log("network: " + std::to_string(net.size()) + " sources");
  timer.finish();
}

void run_synth(StageContext& ctx, const std::string& scenario_name, std::uint64_t seed, bool use_as_input) {
  auto& c = ctx.config;
  c.finalize();
  auto cfg = scenario(scenario_name);
  Workspace ws(c.workdir);
  StageTimer timer(ws, "synth");
  ws.begin_stage("synth");
  auto corpus = generate(cfg, seed, c.threads);
  const auto dir = ws.stage_dir("synth");
  fs::create_directories(dir);
  auto art = ws.store("synth", "articles", "articles", ".jsonl", [&](const fs::path& p) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    write_articles(out, corpus.articles);
  });
  auto truth = ws.store("synth", "truth", "truth", ".json",
                        [&](const fs::path& p) { save_ground_truth(corpus.truth, p); });
  ws.set_pointer("synth", "latest", art.file);
  ws.set_pointer("synth", "latest-truth", truth.file);
  ws.manifest()["stages"]["synth"]["info"] = {{"scenario", scenario_name},
                                              {"seed", seed},
                                              {"articles", corpus.articles.size()}};
  if (use_as_input) {
    c.input = dir / art.file;
    // Align bin edges with the generator's bins when no span was configured.
    if (c.corpus.span_end <= c.corpus.span_start) {
      c.corpus.span_start = cfg.start;
      c.corpus.span_end = cfg.start + std::chrono::days{static_cast<std::int64_t>(cfg.bins) * cfg.days_per_bin};
    }
  }
  ctx.log("synth: scenario " + scenario_name + ", " + std::to_string(corpus.articles.size()) + " articles in " +
          (dir / art.file).string());
  timer.finish();
}

void run_pipeline(StageContext& ctx) {
  run_ingest(ctx);
  run_train(ctx, ModelKind::temporal);
  run_changes(ctx);
  run_train(ctx, ModelKind::source_conditional);
  run_leadership(ctx);
  run_network(ctx);
}

}  // namespace semlead
