#include "semlead/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "semlead/binio.hpp"
#include "semlead/common.hpp"
#include "semlead/hash.hpp"

namespace semlead {

using json = nlohmann::json;

Date parse_date(std::string_view text) {
  auto bad = [&] { return Error("invalid date '" + std::string(text) + "' (expected YYYY-MM-DD)"); };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw bad();
  auto num = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (text[i] < '0' || text[i] > '9') throw bad();
      v = v * 10 + (text[i] - '0');
    }
    return v;
  };
  std::chrono::year_month_day ymd{std::chrono::year{num(0, 4)},
                                  std::chrono::month{static_cast<unsigned>(num(5, 2))},
                                  std::chrono::day{static_cast<unsigned>(num(8, 2))}};
  if (!ymd.ok()) throw bad();
  return Date{ymd};
}

std::string format_date(Date d) {
  std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

// ---------------------------------------------------------------------------
// ingest

IngestResult parse_articles(std::istream& in) {
  IngestResult result;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto warn = [&](std::string msg) { result.warnings.push_back({lineno, std::move(msg)}); };

    json rec = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (rec.is_discarded() || !rec.is_object()) {
      warn("not a JSON object");
      continue;
    }
    RawArticle a;
    bool ok = true;
    for (const char* field : {"id", "source", "date", "text"}) {
      auto it = rec.find(field);
      if (it == rec.end()) {
        warn(std::string("missing field `") + field + "`");
        ok = false;
        break;
      }
      if (!it->is_string()) {
        warn(std::string("field `") + field + "` is not a string");
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    a.id = rec["id"].get<std::string>();
    a.source = rec["source"].get<std::string>();
    a.text = rec["text"].get<std::string>();
    try {
      a.date = parse_date(rec["date"].get<std::string>());
    } catch (const Error& e) {
      warn(e.what());
      continue;
    }
    if (!seen.insert(a.id).second) {
      warn("duplicate id '" + a.id + "'");
      continue;
    }
    result.articles.push_back(std::move(a));
  }
  return result;
}

IngestResult ingest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read input file " + path.string());
  return parse_articles(in);
}

void write_articles(std::ostream& out, std::span<const RawArticle> articles) {
  for (const auto& a : articles) {
    // Key order is fixed so identical inputs give identical bytes.
    json rec = json::object();
    rec["id"] = a.id;
    rec["source"] = a.source;
    rec["date"] = format_date(a.date);
    rec["text"] = a.text;
    out << rec.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// tokenization

SubstitutionTable load_substitutions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read substitution table " + path.string());
  SubstitutionTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw Error(path.string() + ":" + std::to_string(lineno) + ": expected from<TAB>to");
    table[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return table;
}

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

// Folds typographic apostrophes to ASCII and turns the rest of the general
// punctuation block (dashes, quotes, ellipsis) and no-break space into spaces.
std::string fold_punctuation(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    auto c = static_cast<unsigned char>(text[i]);
    if (c == 0xE2 && i + 2 < text.size()) {
      auto c1 = static_cast<unsigned char>(text[i + 1]);
      auto c2 = static_cast<unsigned char>(text[i + 2]);
      if (c1 == 0x80 && (c2 == 0x98 || c2 == 0x99)) {
        out.push_back('\'');
        i += 2;
        continue;
      }
      if (c1 == 0x80 || c1 == 0x81) {
        out.push_back(' ');
        i += 2;
        continue;
      }
    }
    if (c == 0xC2 && i + 1 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0xA0) {
      out.push_back(' ');
      ++i;
      continue;
    }
    out.push_back(static_cast<char>(c));
  }
  return out;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view raw) {
  const std::string text = fold_punctuation(raw);
  std::vector<std::string> tokens;
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    if (!is_word_byte(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::string tok;
    while (i < n) {
      auto c = static_cast<unsigned char>(text[i]);
      if (is_word_byte(c)) {
        tok.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
        ++i;
      } else if ((c == '\'' || c == '-') && i + 1 < n &&
                 is_word_byte(static_cast<unsigned char>(text[i + 1]))) {
        tok.push_back(static_cast<char>(c));
        ++i;
      } else {
        break;
      }
    }
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

std::vector<std::string> normalize(const RawArticle& article, const SubstitutionTable* substitutions) {
  auto tokens = tokenize(article.text);
  if (!substitutions || substitutions->empty()) return tokens;
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (auto& t : tokens) {
    auto it = substitutions->find(t);
    if (it == substitutions->end()) {
      out.push_back(std::move(t));
    } else {
      for (auto& r : tokenize(it->second)) out.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<TextDocument> to_text_documents(std::span<const RawArticle> articles,
                                            const SubstitutionTable* substitutions) {
  std::vector<TextDocument> docs(articles.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(articles.size()); ++i) {
    const auto& a = articles[static_cast<std::size_t>(i)];
    auto& d = docs[static_cast<std::size_t>(i)];
    d.id = a.id;
    d.source = a.source;
    d.date = a.date;
    d.tokens = normalize(a, substitutions);
  }
  return docs;
}

// ---------------------------------------------------------------------------
// deduplication

std::vector<TextDocument> deduplicate(std::vector<TextDocument> docs, int shingle) {
  if (shingle < 1) throw Error("shingle length must be positive");
  const std::size_t n = docs.size();
  const auto len = static_cast<std::size_t>(shingle);

  // Shingle hashes are computed in parallel; conflict resolution below is a
  // sequential greedy pass in priority order.
  std::vector<std::vector<std::uint64_t>> hashes(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const auto& toks = docs[static_cast<std::size_t>(i)].tokens;
    if (toks.size() < len) continue;
    std::vector<std::uint64_t> th(toks.size());
    for (std::size_t p = 0; p < toks.size(); ++p) th[p] = std::hash<std::string>{}(toks[p]);
    auto& out = hashes[static_cast<std::size_t>(i)];
    out.resize(toks.size() - len + 1);
    for (std::size_t p = 0; p + len <= toks.size(); ++p) {
      std::uint64_t h = 0xcbf29ce484222325ULL;
      for (std::size_t k = 0; k < len; ++k) h = splitmix64(h ^ th[p + k]);
      out[p] = h;
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (docs[a].date != docs[b].date) return docs[a].date < docs[b].date;
    if (docs[a].id != docs[b].id) return docs[a].id < docs[b].id;
    return a < b;
  });

  struct Where {
    std::uint32_t doc;
    std::uint32_t pos;
  };
  std::unordered_map<std::uint64_t, std::vector<Where>> index;
  std::vector<char> keep(n, 0);

  auto same_run = [&](std::size_t a, std::size_t pa, std::size_t b, std::size_t pb) {
    for (std::size_t k = 0; k < len; ++k)
      if (docs[a].tokens[pa + k] != docs[b].tokens[pb + k]) return false;
    return true;
  };

  for (std::size_t d : order) {
    bool conflict = false;
    for (std::size_t p = 0; p < hashes[d].size() && !conflict; ++p) {
      auto it = index.find(hashes[d][p]);
      if (it == index.end()) continue;
      for (const auto& w : it->second) {
        if (same_run(d, p, w.doc, w.pos)) {
          conflict = true;
          break;
        }
      }
    }
    if (conflict) continue;
    keep[d] = 1;
    for (std::size_t p = 0; p < hashes[d].size(); ++p)
      index[hashes[d][p]].push_back({static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(p)});
  }

  std::vector<TextDocument> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    if (keep[i]) out.push_back(std::move(docs[i]));
  return out;
}

// ---------------------------------------------------------------------------
// time bins

TimeBinning::TimeBinning(Date start, Date end, int bins) {
  if (bins < 1) throw Error("bin count must be positive");
  days_ = (end - start).count();
  if (days_ < bins)
    throw Error("corpus span " + format_date(start) + ".." + format_date(end) + " is shorter than " +
                std::to_string(bins) + " days");
  edges_.resize(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b)
    edges_[static_cast<std::size_t>(b)] = start + std::chrono::days{b * days_ / bins};
}

int TimeBinning::bin_of(Date d) const {
  if (!contains(d)) throw Error("date " + format_date(d) + " outside corpus span");
  const std::int64_t x = (d - start()).count();
  const std::int64_t t = bins();
  if (x >= days_) return static_cast<int>(t - 1);
  return static_cast<int>(std::min(t - 1, ((x + 1) * t - 1) / days_));
}

void assign_bins(std::vector<TextDocument>& docs, const TimeBinning& binning) {
  for (auto& d : docs) {
    if (!binning.contains(d.date))
      throw Error("document '" + d.id + "' dated " + format_date(d.date) + " is outside the corpus span " +
                  format_date(binning.start()) + ".." + format_date(binning.end()));
    d.bin = binning.bin_of(d.date);
  }
}

// ---------------------------------------------------------------------------
// sources

int SourceTable::index_of(std::string_view name) const {
  auto it = std::lower_bound(names.begin(), names.end(), name);
  if (it == names.end() || *it != name) return -1;
  return static_cast<int>(it - names.begin());
}

std::map<std::string, std::string> load_grouping(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read source grouping " + path.string());
  std::map<std::string, std::string> grouping;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw Error(path.string() + ":" + std::to_string(lineno) + ": expected raw<TAB>canonical");
    grouping[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return grouping;
}

std::pair<std::vector<TextDocument>, SourceTable> filter_and_group_sources(
    std::vector<TextDocument> docs, const std::map<std::string, std::string>& grouping,
    std::int64_t min_articles) {
  std::map<std::string, std::int64_t> counts;
  for (auto& d : docs) {
    if (!grouping.empty()) {
      auto it = grouping.find(d.source);
      if (it == grouping.end()) throw Error("source '" + d.source + "' is not covered by the source grouping");
      d.source = it->second;
    }
    ++counts[d.source];
  }

  SourceTable table;
  table.grouping = grouping;
  for (const auto& [name, n] : counts) {
    if (n < min_articles) continue;
    table.names.push_back(name);
    table.article_counts.push_back(n);
  }
  std::erase_if(docs, [&](const TextDocument& d) { return table.index_of(d.source) < 0; });
  return {std::move(docs), std::move(table)};
}

// ---------------------------------------------------------------------------
// vocabulary

Vocabulary::Vocabulary(std::vector<std::string> words, int sources, int bins)
    : words_(std::move(words)), sources_(sources), bins_(bins) {
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], static_cast<int>(i)).second)
      throw Error("duplicate vocabulary word '" + words_[i] + "'");
  }
  totals_.assign(words_.size(), 0);
  cells_.assign(words_.size() * static_cast<std::size_t>(sources_) * static_cast<std::size_t>(bins_), 0);
}

int Vocabulary::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? -1 : it->second;
}

std::int64_t Vocabulary::bin_count(int w, int t) const {
  std::int64_t n = 0;
  for (int s = 0; s < sources_; ++s) n += count(w, s, t);
  return n;
}

int Vocabulary::zero_count_bins(int w) const {
  int z = 0;
  for (int t = 0; t < bins_; ++t) z += bin_count(w, t) == 0;
  return z;
}

int Vocabulary::distinct_sources(int w) const {
  int n = 0;
  for (int s = 0; s < sources_; ++s) {
    for (int t = 0; t < bins_; ++t) {
      if (count(w, s, t) > 0) {
        ++n;
        break;
      }
    }
  }
  return n;
}

void Vocabulary::recount(std::span<const Document> docs) {
  std::fill(totals_.begin(), totals_.end(), 0);
  std::fill(cells_.begin(), cells_.end(), 0);
  for (const auto& d : docs) {
    if (d.source < 0 || d.source >= sources_ || d.bin < 0 || d.bin >= bins_)
      throw Error("document '" + d.id + "' has source/bin outside the vocabulary layout");
    for (auto w : d.tokens) {
      if (w < 0 || w >= size()) throw Error("document '" + d.id + "' has an out-of-vocabulary index");
      ++totals_[static_cast<std::size_t>(w)];
      ++cells_[(static_cast<std::size_t>(w) * sources_ + d.source) * bins_ + d.bin];
    }
  }
}

std::string Vocabulary::hash() const {
  std::string joined;
  for (const auto& w : words_) {
    joined += w;
    joined += '\n';
  }
  return sha256_hex(joined);
}

Vocabulary build_vocab(std::span<const TextDocument> docs, const SourceTable& sources, int bins, int cap,
                       int min_count) {
  std::unordered_map<std::string, std::int64_t> counts;
  for (const auto& d : docs)
    for (const auto& t : d.tokens) ++counts[t];

  std::vector<std::pair<std::string, std::int64_t>> ranked;
  for (auto& [w, n] : counts)
    if (n >= min_count) ranked.emplace_back(w, n);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (cap >= 0 && ranked.size() > static_cast<std::size_t>(cap)) ranked.resize(static_cast<std::size_t>(cap));
  if (ranked.empty()) throw Error("empty vocabulary (no word reaches min_count=" + std::to_string(min_count) + ")");

  std::vector<std::string> words;
  words.reserve(ranked.size());
  for (auto& [w, n] : ranked) words.push_back(w);
  Vocabulary vocab(std::move(words), sources.size(), bins);
  encode_documents(docs, sources, vocab);
  return vocab;
}

std::vector<Document> encode_documents(std::span<const TextDocument> docs, const SourceTable& sources,
                                       Vocabulary& vocab) {
  std::vector<Document> out;
  out.reserve(docs.size());
  for (const auto& d : docs) {
    int s = sources.index_of(d.source);
    if (s < 0) throw Error("document '" + d.id + "' has unknown source '" + d.source + "'");
    if (d.bin < 0) throw Error("document '" + d.id + "' has no time bin");
    Document e{d.id, s, d.bin, {}};
    e.tokens.reserve(d.tokens.size());
    for (const auto& t : d.tokens) {
      int w = vocab.find(t);
      if (w >= 0) e.tokens.push_back(w);
    }
    if (!e.tokens.empty()) out.push_back(std::move(e));
  }
  vocab.recount(out);
  return out;
}

std::vector<std::int64_t> cell_token_counts(std::span<const Document> docs, int sources, int bins) {
  std::vector<std::int64_t> m(static_cast<std::size_t>(sources) * static_cast<std::size_t>(bins), 0);
  for (const auto& d : docs)
    m[static_cast<std::size_t>(d.source) * static_cast<std::size_t>(bins) + static_cast<std::size_t>(d.bin)] +=
        static_cast<std::int64_t>(d.tokens.size());
  return m;
}

std::vector<Document> cap_tokens(std::vector<Document> docs, int sources, int bins, std::int64_t per_cell_cap,
                                 std::uint64_t seed) {
  if (per_cell_cap <= 0) throw Error("per-cell token cap must be positive");
  std::vector<std::vector<std::size_t>> cells(static_cast<std::size_t>(sources) * static_cast<std::size_t>(bins));
  for (std::size_t i = 0; i < docs.size(); ++i)
    cells[static_cast<std::size_t>(docs[i].source) * static_cast<std::size_t>(bins) +
          static_cast<std::size_t>(docs[i].bin)]
        .push_back(i);

  std::vector<char> drop(docs.size(), 0);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto& members = cells[c];
    std::int64_t total = 0;
    for (auto i : members) total += static_cast<std::int64_t>(docs[i].tokens.size());
    if (total <= per_cell_cap) continue;
    Rng rng(derive_seed(seed, {c}));
    std::shuffle(members.begin(), members.end(), rng);
    for (auto i : members) {
      if (total <= per_cell_cap) break;
      drop[i] = 1;
      total -= static_cast<std::int64_t>(docs[i].tokens.size());
    }
  }
  std::vector<Document> out;
  out.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i)
    if (!drop[i]) out.push_back(std::move(docs[i]));
  return out;
}

std::int64_t EncodedCorpus::num_tokens() const {
  std::int64_t n = 0;
  for (const auto& d : docs) n += static_cast<std::int64_t>(d.tokens.size());
  return n;
}

// ---------------------------------------------------------------------------
// persistence

namespace {
constexpr char kCorpusMagic[8] = {'S', 'L', 'C', 'O', 'R', 'P', '0', '1'};
}

void save_corpus(const EncodedCorpus& corpus, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot write " + path.string());
  binio::Writer w(os);
  w.put_raw(kCorpusMagic, sizeof kCorpusMagic);
  w.put<std::int64_t>(corpus.binning.start().time_since_epoch().count());
  w.put<std::int64_t>(corpus.binning.end().time_since_epoch().count());
  w.put<std::int32_t>(corpus.binning.bins());

  w.put<std::uint64_t>(corpus.sources.names.size());
  for (std::size_t i = 0; i < corpus.sources.names.size(); ++i) {
    w.put_string(corpus.sources.names[i]);
    w.put<std::int64_t>(corpus.sources.article_counts[i]);
  }
  w.put<std::uint64_t>(corpus.sources.grouping.size());
  for (const auto& [raw, canon] : corpus.sources.grouping) {
    w.put_string(raw);
    w.put_string(canon);
  }

  w.put<std::uint64_t>(static_cast<std::uint64_t>(corpus.vocab.size()));
  for (const auto& word : corpus.vocab.words()) w.put_string(word);

  w.put<std::uint64_t>(corpus.docs.size());
  for (const auto& d : corpus.docs) {
    w.put_string(d.id);
    w.put<std::int32_t>(d.source);
    w.put<std::int32_t>(d.bin);
    w.put_vector(d.tokens);
  }
  if (!os) throw Error("failed writing " + path.string());
}

EncodedCorpus load_corpus(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot read corpus " + path.string());
  binio::Reader r(is, "corpus " + path.string());
  char magic[8];
  r.get_raw(magic, sizeof magic);
  if (!std::equal(std::begin(magic), std::end(magic), std::begin(kCorpusMagic))) r.fail("bad magic");

  EncodedCorpus c;
  Date start{std::chrono::days{r.get<std::int64_t>()}};
  Date end{std::chrono::days{r.get<std::int64_t>()}};
  int bins = r.get<std::int32_t>();
  c.binning = TimeBinning(start, end, bins);

  auto nsrc = r.get<std::uint64_t>();
  if (nsrc > (1u << 20)) r.fail("source count out of range");
  for (std::uint64_t i = 0; i < nsrc; ++i) {
    c.sources.names.push_back(r.get_string());
    c.sources.article_counts.push_back(r.get<std::int64_t>());
  }
  if (!std::is_sorted(c.sources.names.begin(), c.sources.names.end())) r.fail("source table not sorted");
  auto ngroup = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < ngroup; ++i) {
    auto raw = r.get_string();
    c.sources.grouping[raw] = r.get_string();
  }

  auto nwords = r.get<std::uint64_t>();
  if (nwords > (1u << 28)) r.fail("vocabulary size out of range");
  std::vector<std::string> words;
  words.reserve(nwords);
  for (std::uint64_t i = 0; i < nwords; ++i) words.push_back(r.get_string());
  c.vocab = Vocabulary(std::move(words), static_cast<int>(nsrc), bins);

  auto ndocs = r.get<std::uint64_t>();
  c.docs.reserve(std::min<std::uint64_t>(ndocs, 1u << 24));
  for (std::uint64_t i = 0; i < ndocs; ++i) {
    Document d;
    d.id = r.get_string();
    d.source = r.get<std::int32_t>();
    d.bin = r.get<std::int32_t>();
    d.tokens = r.get_vector<std::int32_t>();
    c.docs.push_back(std::move(d));
  }
  c.vocab.recount(c.docs);
  return c;
}

// ---------------------------------------------------------------------------

EncodedCorpus prepare_corpus(std::span<const RawArticle> articles, const CorpusOptions& opt,
                             const std::map<std::string, std::string>& grouping,
                             const SubstitutionTable* substitutions) {
  if (articles.empty()) throw Error("no articles to process");
  auto docs = to_text_documents(articles, substitutions);

  Date start = opt.span_start, end = opt.span_end;
  if (end <= start) {
    auto [lo, hi] = std::minmax_element(docs.begin(), docs.end(),
                                        [](const auto& a, const auto& b) { return a.date < b.date; });
    start = lo->date;
    end = hi->date;
  }
  TimeBinning binning(start, end, opt.bins);

  if (opt.dedup && opt.dedup_before_filter) docs = deduplicate(std::move(docs), opt.shingle);
  assign_bins(docs, binning);
  auto [kept, table] = filter_and_group_sources(std::move(docs), grouping, opt.min_articles);
  if (opt.dedup && !opt.dedup_before_filter) {
    kept = deduplicate(std::move(kept), opt.shingle);
    std::fill(table.article_counts.begin(), table.article_counts.end(), 0);
    for (const auto& d : kept) ++table.article_counts[static_cast<std::size_t>(table.index_of(d.source))];
  }
  if (table.size() == 0) throw Error("no source has at least " + std::to_string(opt.min_articles) + " articles");

  EncodedCorpus corpus;
  corpus.binning = binning;
  corpus.vocab = build_vocab(kept, table, opt.bins, opt.vocab_cap, opt.min_count);
  corpus.docs = encode_documents(kept, table, corpus.vocab);
  corpus.sources = std::move(table);
  if (opt.per_cell_token_cap > 0) {
    corpus.docs = cap_tokens(std::move(corpus.docs), corpus.num_sources(), opt.bins, opt.per_cell_token_cap,
                             opt.seed);
    corpus.vocab.recount(corpus.docs);
  }
  return corpus;
}

}  // namespace semlead
