#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "semlead/change.hpp"
#include "semlead/corpus.hpp"
#include "semlead/embed.hpp"
#include "semlead/lead.hpp"
#include "semlead/network.hpp"

namespace semlead {

struct RunConfig {
  std::filesystem::path input;
  std::filesystem::path workdir = "semlead-work";
  std::filesystem::path grouping;
  std::filesystem::path substitutions;
  std::filesystem::path stoplist;

  CorpusOptions corpus;
  Hyperparams embed;
  /// Initialize the source-conditional model from the latest temporal model
  /// instead of from scratch.
  bool source_warm_start = false;
  ChangeParams change;
  FilterRuleSet filter;
  std::size_t top_m = 500;
  LeadOptions lead;
  NullOptions nulls;
  double percentile = 95.0;
  bool dump_nulls = true;
  PageRankOptions pagerank;

  std::uint64_t seed = 1;
  int threads = 1;
  /// Train with the serial kernel so every artifact is reproducible bit for bit.
  bool deterministic = true;

  /// Applies one `key=value` assignment; throws semlead::Error naming the key.
  void set(const std::string& key, const std::string& value);
  /// Every key in canonical order with its current value.
  std::vector<std::pair<std::string, std::string>> entries() const;
  /// Propagates the master seed and thread count into the module options.
  void finalize();
};

struct ConfigKeyInfo {
  std::string key;
  std::string default_value;
  std::string description;
};
std::vector<ConfigKeyInfo> describe_defaults();

/// Lines of `key = value`; `#` starts a comment; unknown keys are fatal.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(std::istream& in, const std::string& origin = "config");
void write_config(std::ostream& out, const RunConfig& config);

}  // namespace semlead
