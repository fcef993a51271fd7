#include "semlead/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

#include "semlead/common.hpp"
#include "semlead/sampling.hpp"

namespace semlead {

namespace {

std::string background_word(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "bg%04d", i);
  return buf;
}

std::string topic_word(int topic, int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "tp%02dw%02d", topic, i);
  return buf;
}

}  // namespace

std::string source_name(int s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "src%02d", s);
  return buf;
}

bool SynthConfig::publishes(int source, int bin) const {
  if (silent_from.empty()) return true;
  const int from = silent_from[static_cast<std::size_t>(source)];
  return from < 0 || bin < from;
}

void SynthConfig::validate() const {
  if (sources < 2) throw Error("synth: need at least two sources");
  if (bins < 2) throw Error("synth: need at least two bins");
  if (background_vocab < 1) throw Error("synth: background vocabulary must be nonempty");
  if (!(zipf_exponent >= 0)) throw Error("synth: zipf exponent must be non-negative");
  if (!(topic_share >= 0 && topic_share <= 1)) throw Error("synth: topic_share must be in [0, 1]");
  if (topic_share > 0 && topics < 1) throw Error("synth: topic_share > 0 needs at least one topic");
  if (topics > 0 && topic_words < 1) throw Error("synth: topics need at least one word each");
  if (topics > 100 || topic_words > 100) throw Error("synth: at most 100 topics of 100 words");
  if (docs_per_cell < 1 || doc_length < 1) throw Error("synth: documents must be nonempty");
  if (days_per_bin < 1) throw Error("synth: days_per_bin must be positive");
  if (!silent_from.empty() && static_cast<int>(silent_from.size()) != sources)
    throw Error("synth: silent_from needs one entry per source");
  std::set<std::string> names;
  for (const auto& p : planted) {
    if (p.word.empty()) throw Error("synth: planted word needs a name");
    if (!names.insert(p.word).second) throw Error("synth: duplicate planted word " + p.word);
    if (p.word.starts_with("bg") || p.word.starts_with("tp")) throw Error("synth: planted word clashes with generated vocabulary");
    if (p.old_topic < 0 || p.old_topic >= topics || p.new_topic < 0 || p.new_topic >= topics)
      throw Error("synth: planted word " + p.word + " refers to a topic outside the vocabulary");
    if (p.old_topic == p.new_topic) throw Error("synth: sense context sets must be disjoint");
    if (static_cast<int>(p.switch_bin.size()) != sources)
      throw Error("synth: planted word " + p.word + " needs one switch bin per source");
    for (int b : p.switch_bin)
      if (b < -1 || b >= bins) throw Error("synth: switch bin out of range");
  }
  if (!planted.empty()) {
    const int snippet = 2 * context_width + 1;
    const int per_word = snippets_per_doc;
    const auto needed = static_cast<std::int64_t>(snippet) * per_word * static_cast<std::int64_t>(planted.size());
    if (snippets_per_doc < 1 || context_width < 0) throw Error("synth: bad snippet layout");
    if (needed > doc_length) throw Error("synth: documents too short for the planted snippets");
  }
}

SynthCorpus generate(const SynthConfig& config, std::uint64_t seed, int threads) {
  config.validate();
  const int S = config.sources, T = config.bins, D = config.docs_per_cell;

  std::vector<double> zipf(static_cast<std::size_t>(config.background_vocab));
  for (std::size_t i = 0; i < zipf.size(); ++i) zipf[i] = 1.0 / std::pow(static_cast<double>(i + 1), config.zipf_exponent);
  const AliasSampler background(zipf);

  std::vector<std::string> bg(zipf.size());
  for (std::size_t i = 0; i < bg.size(); ++i) bg[i] = background_word(static_cast<int>(i));
  std::vector<std::vector<std::string>> topic(static_cast<std::size_t>(config.topics));
  for (int k = 0; k < config.topics; ++k)
    for (int i = 0; i < config.topic_words; ++i) topic[static_cast<std::size_t>(k)].push_back(topic_word(k, i));

  const std::size_t total = static_cast<std::size_t>(S) * T * D;
  std::vector<RawArticle> articles(total);

#pragma omp parallel for schedule(static) num_threads(threads) if (threads > 1)
  for (std::int64_t idx = 0; idx < static_cast<std::int64_t>(total); ++idx) {
    const int s = static_cast<int>(idx / (T * D));
    const int t = static_cast<int>((idx / D) % T);
    const int i = static_cast<int>(idx % D);
    auto& art = articles[static_cast<std::size_t>(idx)];
    if (!config.publishes(s, t)) continue;
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(i)}));
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const int doc_topic = config.topics > 0 ? static_cast<int>(rng() % static_cast<std::uint64_t>(config.topics)) : -1;
    std::vector<const std::string*> toks(static_cast<std::size_t>(config.doc_length));
    for (auto& tok : toks) {
      if (doc_topic >= 0 && config.topic_share > 0 && unit(rng) < config.topic_share) {
        const auto& words = topic[static_cast<std::size_t>(doc_topic)];
        tok = &words[rng() % words.size()];
      } else {
        tok = &bg[static_cast<std::size_t>(background(rng))];
      }
    }

    // Snippets: the planted word surrounded by words of its active sense,
    // one per equal segment of the document.
    const int width = 2 * config.context_width + 1;
    const int slots = config.snippets_per_doc * static_cast<int>(config.planted.size());
    const int segment = config.doc_length / std::max(1, slots);
    int slot = 0;
    for (const auto& p : config.planted) {
      const int sw = p.switch_bin[static_cast<std::size_t>(s)];
      const int sense = (sw >= 0 && t >= sw) ? p.new_topic : p.old_topic;
      const auto& ctx = topic[static_cast<std::size_t>(sense)];
      for (int r = 0; r < config.snippets_per_doc; ++r, ++slot) {
        const int room = segment - width;
        const int offset = slot * segment + (room > 0 ? static_cast<int>(rng() % static_cast<std::uint64_t>(room + 1)) : 0);
        for (int j = 0; j < width; ++j) {
          auto& tok = toks[static_cast<std::size_t>(offset + j)];
          tok = j == config.context_width ? &p.word : &ctx[rng() % ctx.size()];
        }
      }
    }

    art.source = source_name(s);
    art.id = "s" + std::to_string(s) + "-b" + std::to_string(t) + "-d" + std::to_string(i);
    art.date = config.start + std::chrono::days(static_cast<std::int64_t>(t) * config.days_per_bin +
                                                static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(config.days_per_bin)));
    std::size_t len = 0;
    for (auto* tok : toks) len += tok->size() + 1;
    art.text.reserve(len);
    for (std::size_t j = 0; j < toks.size(); ++j) {
      if (j) art.text += ' ';
      art.text += *toks[j];
    }
  }
  std::erase_if(articles, [](const RawArticle& a) { return a.id.empty(); });

  SynthCorpus out;
  out.articles = std::move(articles);
  auto& truth = out.truth;
  truth.scenario = config.name;
  for (int s = 0; s < S; ++s) truth.sources.push_back(source_name(s));
  for (const auto& p : config.planted) {
    PlantedTruth pt;
    pt.word = p.word;
    int first = -1;
    for (int b : p.switch_bin)
      if (b >= 0 && (first < 0 || b < first)) first = b;
    if (first > 0) {
      pt.change_t1 = first - 1;
      pt.change_t2 = first;
      for (int s = 0; s < S; ++s) {
        const int b = p.switch_bin[static_cast<std::size_t>(s)];
        if (b == first + 1) pt.followers.push_back(source_name(s));
      }
      if (!pt.followers.empty()) {
        pt.lead_t1 = first;
        for (int s = 0; s < S; ++s)
          if (p.switch_bin[static_cast<std::size_t>(s)] == first) pt.leaders.push_back(source_name(s));
      }
    }
    truth.planted.push_back(std::move(pt));
  }
  for (int s = 0; s < S; ++s)
    if (!config.silent_from.empty() && config.silent_from[static_cast<std::size_t>(s)] >= 0)
      truth.silent_sources.push_back(source_name(s));
  truth.exchangeable = config.planted.empty() && truth.silent_sources.empty();
  return out;
}

namespace {

SynthConfig base_scenario(std::string name) {
  SynthConfig c;
  c.name = std::move(name);
  return c;
}

PlantedWord planted(int sources, int leader_switch, int follower_switch, int leaders = 1) {
  PlantedWord p;
  p.word = "beacon";
  p.old_topic = 0;
  p.new_topic = 1;
  p.switch_bin.assign(static_cast<std::size_t>(sources), follower_switch);
  for (int s = 0; s < leaders; ++s) p.switch_bin[static_cast<std::size_t>(s)] = leader_switch;
  return p;
}

}  // namespace

std::map<std::string, SynthConfig> scenario_library() {
  std::map<std::string, SynthConfig> lib;

  auto lead = base_scenario("genuine-lead");
  lead.planted.push_back(planted(lead.sources, 4, 5));
  lib[lead.name] = lead;

  auto stable = base_scenario("no-change");
  stable.planted.push_back(planted(stable.sources, -1, -1));
  lib[stable.name] = stable;

  auto silent = base_scenario("silent-source");
  silent.planted.push_back(planted(silent.sources, 4, 5));
  silent.silent_from.assign(static_cast<std::size_t>(silent.sources), -1);
  silent.silent_from.back() = 4;
  lib[silent.name] = silent;

  auto sync = base_scenario("synchronous");
  sync.planted.push_back(planted(sync.sources, 5, 5, sync.sources));
  lib[sync.name] = sync;
  return lib;
}

SynthConfig scenario(const std::string& name) {
  auto lib = scenario_library();
  auto it = lib.find(name);
  if (it == lib.end()) {
    std::string known;
    for (const auto& [k, v] : lib) known += (known.empty() ? "" : ", ") + k;
    throw Error("unknown scenario '" + name + "' (known: " + known + ")");
  }
  return it->second;
}

void save_ground_truth(const GroundTruth& truth, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["scenario"] = truth.scenario;
  j["sources"] = truth.sources;
  j["exchangeable"] = truth.exchangeable;
  j["silent_sources"] = truth.silent_sources;
  j["planted"] = nlohmann::ordered_json::array();
  for (const auto& p : truth.planted) {
    nlohmann::ordered_json e;
    e["word"] = p.word;
    e["change_t1"] = p.change_t1;
    e["change_t2"] = p.change_t2;
    e["lead_t1"] = p.lead_t1;
    e["leaders"] = p.leaders;
    e["followers"] = p.followers;
    j["planted"].push_back(e);
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read ground truth " + path.string());
  try {
    auto j = nlohmann::json::parse(in);
    GroundTruth t;
    t.scenario = j.at("scenario").get<std::string>();
    t.sources = j.at("sources").get<std::vector<std::string>>();
    t.exchangeable = j.at("exchangeable").get<bool>();
    t.silent_sources = j.at("silent_sources").get<std::vector<std::string>>();
    for (const auto& e : j.at("planted")) {
      PlantedTruth p;
      p.word = e.at("word").get<std::string>();
      p.change_t1 = e.at("change_t1").get<int>();
      p.change_t2 = e.at("change_t2").get<int>();
      p.lead_t1 = e.at("lead_t1").get<int>();
      p.leaders = e.at("leaders").get<std::vector<std::string>>();
      p.followers = e.at("followers").get<std::vector<std::string>>();
      t.planted.push_back(std::move(p));
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed ground truth " + path.string() + ": " + e.what());
  }
}

}  // namespace semlead
