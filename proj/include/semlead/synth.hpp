#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "semlead/corpus.hpp"

namespace semlead {

/// A word whose context switches from one topic's words to another's.
struct PlantedWord {
  std::string word;
  int old_topic = 0;
  int new_topic = 1;
  /// Per source: first bin using the new sense, -1 for never.
  std::vector<int> switch_bin;
};

struct SynthConfig {
  std::string name;
  int sources = 6;
  int bins = 10;
  int background_vocab = 300;
  double zipf_exponent = 0.5;
  int topics = 8;
  int topic_words = 24;
  /// Share of background tokens drawn from the document's topic. At 0 the
  /// topic words occur only as planted-word contexts and the background is
  /// i.i.d. unigram text.
  double topic_share = 0.0;
  int docs_per_cell = 12;
  int doc_length = 280;
  int snippets_per_doc = 4;
  int context_width = 4;
  std::vector<PlantedWord> planted;
  /// Per source: first bin in which it stops publishing, -1 for never.
  std::vector<int> silent_from;
  Date start = Date{std::chrono::year{1850} / 1 / 1};
  int days_per_bin = 365;
  std::uint64_t seed = 1;

  /// Throws semlead::Error on an infeasible configuration.
  void validate() const;
  bool publishes(int source, int bin) const;
};

struct PlantedTruth {
  std::string word;
  /// Bins around the first appearance of the new sense; -1 when it never changes.
  int change_t1 = -1;
  int change_t2 = -1;
  /// Interval (lead_t1, lead_t1 + 1) on which leaders already use the new
  /// sense and followers adopt it; -1 when nobody follows one bin later.
  int lead_t1 = -1;
  std::vector<std::string> leaders;    // sources switching first
  std::vector<std::string> followers;  // sources switching one bin later
};

struct GroundTruth {
  std::string scenario;
  std::vector<std::string> sources;
  std::vector<PlantedTruth> planted;
  std::vector<std::string> silent_sources;
  /// Sources are interchangeable: nothing is planted and every source publishes everywhere.
  bool exchangeable = false;
};

struct SynthCorpus {
  std::vector<RawArticle> articles;
  GroundTruth truth;
};

std::string source_name(int s);

/// Deterministic in (config, seed); documents are generated independently
/// from per-document derived seeds.
SynthCorpus generate(const SynthConfig& config, std::uint64_t seed, int threads = 1);

/// "genuine-lead", "no-change", "silent-source" and "synchronous".
std::map<std::string, SynthConfig> scenario_library();
SynthConfig scenario(const std::string& name);

void save_ground_truth(const GroundTruth& truth, const std::filesystem::path& path);
GroundTruth load_ground_truth(const std::filesystem::path& path);

}  // namespace semlead
