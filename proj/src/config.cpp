#include "semlead/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

#include "semlead/common.hpp"
#include "semlead/csv.hpp"

namespace semlead {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T x{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw Error("config: " + key + " expects a number, got '" + v + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error("config: " + key + " expects true or false, got '" + v + "'");
}

std::string show(bool b) { return b ? "true" : "false"; }
std::string show(double x) { return csv::number(x); }
template <typename T>
std::string show(T x) requires std::is_integral_v<T> { return std::to_string(x); }
std::string show(const std::filesystem::path& p) { return p.string(); }
std::string show(Date d) { return d == Date{} ? "" : format_date(d); }

struct Field {
  const char* key;
  const char* description;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define SEMLEAD_NUM(KEY, MEMBER, DESC)                                                                \
  Field {                                                                                             \
    KEY, DESC,                                                                                        \
        [](RunConfig& c, const std::string& v) { c.MEMBER = parse_number<decltype(c.MEMBER)>(KEY, v); }, \
        [](const RunConfig& c) { return show(c.MEMBER); }                                             \
  }
#define SEMLEAD_BOOL(KEY, MEMBER, DESC)                                                  \
  Field {                                                                                \
    KEY, DESC, [](RunConfig& c, const std::string& v) { c.MEMBER = parse_bool(KEY, v); }, \
        [](const RunConfig& c) { return show(c.MEMBER); }                                \
  }
#define SEMLEAD_PATH(KEY, MEMBER, DESC)                                        \
  Field {                                                                      \
    KEY, DESC, [](RunConfig& c, const std::string& v) { c.MEMBER = v; },        \
        [](const RunConfig& c) { return show(c.MEMBER); }                      \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      SEMLEAD_PATH("input", input, "article file, one JSON object per line"),
      SEMLEAD_PATH("workdir", workdir, "directory holding stage artifacts and the manifest"),
      SEMLEAD_PATH("grouping", grouping, "optional raw<TAB>canonical source grouping file"),
      SEMLEAD_PATH("substitutions", substitutions, "optional from<TAB>to token repair table"),
      SEMLEAD_PATH("stoplist", stoplist, "optional words removed from the change list (named entities)"),
      SEMLEAD_NUM("corpus.bins", corpus.bins, "number of equal-duration time bins"),
      Field{"corpus.span_start", "first day of the corpus span (default: earliest article)",
            [](RunConfig& c, const std::string& v) { c.corpus.span_start = v.empty() ? Date{} : parse_date(v); },
            [](const RunConfig& c) { return show(c.corpus.span_start); }},
      Field{"corpus.span_end", "last day of the corpus span (default: latest article)",
            [](RunConfig& c, const std::string& v) { c.corpus.span_end = v.empty() ? Date{} : parse_date(v); },
            [](const RunConfig& c) { return show(c.corpus.span_end); }},
      SEMLEAD_NUM("corpus.min_articles", corpus.min_articles, "sources with fewer articles are dropped"),
      SEMLEAD_NUM("corpus.vocab_cap", corpus.vocab_cap, "most frequent words kept"),
      SEMLEAD_NUM("corpus.min_count", corpus.min_count, "minimum corpus frequency of a kept word"),
      SEMLEAD_NUM("corpus.shingle", corpus.shingle, "token run length for near-duplicate detection"),
      SEMLEAD_BOOL("corpus.dedup", corpus.dedup, "remove near-duplicate articles"),
      SEMLEAD_BOOL("corpus.dedup_before_filter", corpus.dedup_before_filter,
                   "deduplicate before dropping small sources"),
      SEMLEAD_NUM("corpus.per_cell_token_cap", corpus.per_cell_token_cap,
                  "maximum tokens per (source, bin) cell, 0 for no cap"),
      SEMLEAD_NUM("embed.dims", embed.dims, "embedding dimensionality"),
      SEMLEAD_NUM("embed.window", embed.window, "context window on each side"),
      SEMLEAD_NUM("embed.l2_lambda", embed.l2_lambda, "l2 penalty on residual embeddings"),
      SEMLEAD_NUM("embed.negatives", embed.negatives, "negative samples per positive pair"),
      SEMLEAD_NUM("embed.noise_exponent", embed.noise_exponent, "exponent of the unigram noise distribution"),
      SEMLEAD_NUM("embed.learning_rate", embed.learning_rate, "initial SGD learning rate"),
      SEMLEAD_NUM("embed.min_learning_rate", embed.min_learning_rate, "final SGD learning rate"),
      SEMLEAD_NUM("embed.epochs", embed.epochs, "passes over the corpus"),
      SEMLEAD_BOOL("embed.source_warm_start", source_warm_start,
                   "start the source-conditional model from the temporal model"),
      SEMLEAD_NUM("change.k", change.k, "nearest neighbors per bin in the change measure"),
      SEMLEAD_NUM("change.min_occurrences", change.min_occurrences,
                  "occurrences needed in both bins for a pair to be scored"),
      SEMLEAD_NUM("change.top_m", top_m, "filtered changes carried into leadership analysis"),
      SEMLEAD_NUM("filter.min_length", filter.min_length, "shortest word kept"),
      SEMLEAD_BOOL("filter.reject_trailing_hyphen", filter.reject_trailing_hyphen, "drop words ending in '-'"),
      SEMLEAD_NUM("filter.max_zero_count_bins", filter.max_zero_count_bins,
                  "most bins in which a kept word may be absent"),
      SEMLEAD_NUM("filter.min_distinct_sources", filter.min_distinct_sources, "fewest sources using a kept word"),
      SEMLEAD_NUM("filter.min_change_bin_occurrences", filter.min_change_bin_occurrences,
                  "occurrences needed in each bin of the change"),
      SEMLEAD_NUM("lead.replicates", nulls.replicates, "randomized corpora in the null distribution"),
      SEMLEAD_NUM("lead.percentile", percentile, "null percentile a lead score must exceed"),
      SEMLEAD_NUM("lead.epsilon", lead.epsilon, "smallest usable denominator magnitude"),
      SEMLEAD_BOOL("lead.require_usage", lead.require_usage,
                   "score only sources that use the word in the bins involved"),
      Field{"lead.null_mode", "warm: retrain residuals on fixed base/output tables; full: retrain everything",
            [](RunConfig& c, const std::string& v) { c.nulls.mode = parse_null_mode(v); },
            [](const RunConfig& c) { return std::string(to_string(c.nulls.mode)); }},
      Field{"lead.null_statistic",
            "tuple: null draws score the event's own pair; max_pair: the best pair, as the event was chosen",
            [](RunConfig& c, const std::string& v) { c.nulls.statistic = parse_null_statistic(v); },
            [](const RunConfig& c) { return std::string(to_string(c.nulls.statistic)); }},
      SEMLEAD_BOOL("lead.null_retrain_temporal", nulls.retrain_temporal,
                   "warm mode: retrain temporal residuals too"),
      Field{"lead.randomize", "tokens: swap tokens across sources within a bin; documents: swap source labels",
            [](RunConfig& c, const std::string& v) { c.nulls.randomize = parse_randomize_mode(v); },
            [](const RunConfig& c) { return std::string(to_string(c.nulls.randomize)); }},
      SEMLEAD_NUM("lead.max_retries", nulls.max_retries, "retries of a diverged null replicate"),
      SEMLEAD_BOOL("lead.dump_nulls", dump_nulls, "write every null draw for audit"),
      SEMLEAD_NUM("network.alpha", pagerank.alpha, "PageRank damping factor; beta is (1 - alpha) / |S|"),
      SEMLEAD_NUM("seed", seed, "master random seed"),
      SEMLEAD_NUM("threads", threads, "worker threads"),
      SEMLEAD_BOOL("deterministic", deterministic, "serial training so artifacts reproduce exactly"),
  };
  return table;
}

#undef SEMLEAD_NUM
#undef SEMLEAD_BOOL
#undef SEMLEAD_PATH

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(*this, value);
      return;
    }
  }
  throw Error("config: unknown key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(*this));
  return out;
}

void RunConfig::finalize() {
  if (threads < 1) throw Error("config: threads must be positive");
  if (!(pagerank.alpha > 0 && pagerank.alpha < 1)) throw Error("config: network.alpha must be in (0, 1)");
  if (!(percentile > 0 && percentile <= 100)) throw Error("config: lead.percentile must be in (0, 100]");
  if (nulls.replicates < 1) throw Error("config: lead.replicates must be positive");
  pagerank.beta = -1;
  embed.validate();
  corpus.seed = derive_seed(seed, {1});
  embed.seed = derive_seed(seed, {2});
  nulls.seed = derive_seed(seed, {3});
  nulls.threads = threads;
}

std::vector<ConfigKeyInfo> describe_defaults() {
  RunConfig c;
  std::vector<ConfigKeyInfo> out;
  for (const auto& f : fields()) out.push_back({f.key, f.get(c), f.description});
  return out;
}

RunConfig parse_config(std::istream& in, const std::string& origin) {
  RunConfig c;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(origin + ":" + std::to_string(n) + ": expected key = value");
    try {
      c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(origin + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config " + path.string());
  return parse_config(in, path.string());
}

void write_config(std::ostream& out, const RunConfig& config) {
  for (const auto& [k, v] : config.entries()) out << k << " = " << v << '\n';
}

}  // namespace semlead
