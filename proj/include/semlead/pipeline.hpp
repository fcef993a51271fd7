#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "semlead/config.hpp"
#include "semlead/embed.hpp"

namespace semlead {

struct ArtifactRef {
  std::string file;  // relative to the stage directory
  std::string sha256;
};

/// Stage directories under the work directory, content-addressed artifacts
/// and the run manifest (`manifest.json`).
class Workspace {
 public:
  explicit Workspace(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path stage_dir(const std::string& stage) const;

  /// Writes through `writer` into a temporary file, then renames it to
  /// `<stem>-<first 16 hex digits of its SHA-256><ext>` and records it in the
  /// manifest under (stage, label).
  ArtifactRef store(const std::string& stage, const std::string& label, const std::string& stem,
                    const std::string& ext, const std::function<void(const std::filesystem::path&)>& writer);
  ArtifactRef store_text(const std::string& stage, const std::string& label, const std::string& stem,
                         const std::string& ext, const std::string& content);

  /// `<stage dir>/<name>` holding the artifact's file name.
  void set_pointer(const std::string& stage, const std::string& name, const std::string& file);
  std::optional<std::string> pointer(const std::string& stage, const std::string& name) const;

  /// Path of a recorded artifact after checking that it still exists and
  /// still has the recorded hash. `rerun` names the command that rebuilds it.
  std::filesystem::path verified(const std::string& stage, const std::string& label, const std::string& rerun) const;
  /// Verified path of whatever the pointer names, looked up among the
  /// stage's recorded artifacts.
  std::filesystem::path verified_pointer(const std::string& stage, const std::string& name,
                                         const std::string& rerun) const;
  std::optional<ArtifactRef> artifact(const std::string& stage, const std::string& label) const;

  /// Records which upstream artifacts a stage consumed.
  void set_upstream(const std::string& stage, const std::vector<std::pair<std::string, std::string>>& labels);
  /// Throws when an upstream artifact recorded for `stage` has since been
  /// replaced, naming the command to rerun.
  void require_fresh(const std::string& stage, const std::string& rerun) const;

  nlohmann::ordered_json& manifest() { return manifest_; }
  const nlohmann::ordered_json& manifest() const { return manifest_; }
  void begin_stage(const std::string& stage);
  void save_manifest() const;

 private:
  std::filesystem::path root_;
  nlohmann::ordered_json manifest_;
};

struct StageContext {
  RunConfig config;
  std::function<void(const std::string&)> log = [](const std::string&) {};
  /// Receives machine-readable output (changes, events, report) when set.
  std::ostream* out = nullptr;
};

void run_ingest(StageContext& ctx);
void run_train(StageContext& ctx, ModelKind kind);
void run_changes(StageContext& ctx);
void run_leadership(StageContext& ctx);
void run_network(StageContext& ctx);
/// Writes `articles.jsonl` and `truth.json` for a library scenario; when
/// `use_as_input` is set, the config's input points at the articles.
void run_synth(StageContext& ctx, const std::string& scenario_name, std::uint64_t seed, bool use_as_input);
/// ingest, train temporal, changes, train source, leadership, network.
void run_pipeline(StageContext& ctx);

}  // namespace semlead
