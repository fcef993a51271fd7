#pragma once

#include <chrono>
#include <filesystem>
#include <string>

#include "semlead/corpus.hpp"
#include "semlead/synth.hpp"

namespace fixture {

/// Corpus options whose bin edges coincide with the generator's bins.
inline semlead::CorpusOptions synth_options(const semlead::SynthConfig& cfg) {
  semlead::CorpusOptions opt;
  opt.bins = cfg.bins;
  opt.span_start = cfg.start;
  opt.span_end = cfg.start + std::chrono::days{static_cast<std::int64_t>(cfg.bins) * cfg.days_per_bin};
  opt.min_articles = 1;
  opt.min_count = 1;
  opt.dedup = false;
  return opt;
}

inline semlead::EncodedCorpus encode(const semlead::SynthConfig& cfg, std::uint64_t seed) {
  auto syn = semlead::generate(cfg, seed);
  return semlead::prepare_corpus(syn.articles, synth_options(cfg));
}

/// A small corpus: 3 sources, 4 bins, one planted word switching at bin 2.
inline semlead::SynthConfig tiny_config() {
  auto cfg = semlead::scenario("genuine-lead");
  cfg.sources = 3;
  cfg.bins = 4;
  cfg.background_vocab = 300;
  cfg.topics = 4;
  cfg.topic_words = 10;
  cfg.docs_per_cell = 4;
  cfg.doc_length = 80;
  cfg.snippets_per_doc = 2;
  cfg.planted.resize(1);
  cfg.planted[0].switch_bin = {1, 2, 2};
  cfg.silent_from.assign(3, -1);
  return cfg;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("semlead-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixture
