#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "semlead/common.hpp"

namespace semlead {

using Date = std::chrono::sys_days;

/// Parses a strict ISO-8601 calendar date (YYYY-MM-DD). Throws semlead::Error.
Date parse_date(std::string_view text);
std::string format_date(Date d);

struct RawArticle {
  std::string id;
  std::string source;
  Date date{};
  std::string text;
};

struct IngestWarning {
  std::size_t line = 0;
  std::string message;
};

struct IngestResult {
  std::vector<RawArticle> articles;
  std::vector<IngestWarning> warnings;
};

/// Reads JSON-lines article records with string fields `id`, `source`,
/// `date` and `text`. Malformed lines are skipped and reported by line number
/// (1-based). Duplicate ids are treated as malformed.
IngestResult ingest(const std::filesystem::path& path);
IngestResult parse_articles(std::istream& in);
void write_articles(std::ostream& out, std::span<const RawArticle> articles);

/// Token-level replacements applied after tokenization, e.g. for repairing
/// run-together words ("senatoradmits" -> "senator admits").
using SubstitutionTable = std::unordered_map<std::string, std::string>;

/// Tab-separated `from<TAB>to` lines; blank lines and `#` comments ignored.
SubstitutionTable load_substitutions(const std::filesystem::path& path);

/// Lowercases and splits into maximal runs of letters/digits. An apostrophe
/// or hyphen is kept only when it sits between two word characters. Bytes
/// >= 0x80 count as letters so UTF-8 words survive intact; U+2019 is folded
/// to an ASCII apostrophe first.
std::vector<std::string> tokenize(std::string_view text);
std::vector<std::string> normalize(const RawArticle& article,
                                   const SubstitutionTable* substitutions = nullptr);

/// An article after normalization, before vocabulary encoding.
struct TextDocument {
  std::string id;
  std::string source;
  Date date{};
  int bin = -1;
  std::vector<std::string> tokens;
};

std::vector<TextDocument> to_text_documents(std::span<const RawArticle> articles,
                                            const SubstitutionTable* substitutions = nullptr);

/// Removes documents that share a contiguous run of `shingle` tokens with a
/// document of higher priority (earlier date, then smaller id). The result is
/// in input order.
std::vector<TextDocument> deduplicate(std::vector<TextDocument> docs, int shingle = 8);

/// `bins` equal-duration intervals over [start, end]. Edge b sits at
/// start + floor(b * days / bins), so durations differ by at most one day.
/// Intervals are half-open except the last, which includes `end`.
class TimeBinning {
 public:
  TimeBinning() = default;
  TimeBinning(Date start, Date end, int bins);

  int bins() const { return static_cast<int>(edges_.size()) - 1; }
  Date start() const { return edges_.front(); }
  Date end() const { return edges_.back(); }
  const std::vector<Date>& edges() const { return edges_; }
  bool contains(Date d) const { return d >= start() && d <= end(); }

  /// Throws semlead::Error when `d` is outside the span.
  int bin_of(Date d) const;

 private:
  std::vector<Date> edges_;
  std::int64_t days_ = 0;
};

/// Sets `bin` on every document; an out-of-span date is fatal and names the id.
void assign_bins(std::vector<TextDocument>& docs, const TimeBinning& binning);

struct SourceTable {
  std::vector<std::string> names;               // canonical, sorted
  std::map<std::string, std::string> grouping;  // raw -> canonical
  std::vector<std::int64_t> article_counts;     // parallel to names

  int size() const { return static_cast<int>(names.size()); }
  /// -1 when absent.
  int index_of(std::string_view name) const;
};

/// Parses `raw<TAB>canonical` lines.
std::map<std::string, std::string> load_grouping(const std::filesystem::path& path);

/// Renames sources through `grouping` (empty grouping means identity; a
/// non-empty grouping must cover every raw name) and drops sources with fewer
/// than `min_articles` documents.
std::pair<std::vector<TextDocument>, SourceTable> filter_and_group_sources(
    std::vector<TextDocument> docs, const std::map<std::string, std::string>& grouping,
    std::int64_t min_articles);

/// An encoded article. Tokens index the owning corpus vocabulary.
struct Document {
  std::string id;
  std::int32_t source = 0;
  std::int32_t bin = 0;
  std::vector<std::int32_t> tokens;
};

class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> words, int sources, int bins);

  int size() const { return static_cast<int>(words_.size()); }
  int sources() const { return sources_; }
  int bins() const { return bins_; }
  const std::string& word(int w) const { return words_[static_cast<std::size_t>(w)]; }
  const std::vector<std::string>& words() const { return words_; }
  /// -1 when absent.
  int find(std::string_view word) const;

  std::int64_t total(int w) const { return totals_[static_cast<std::size_t>(w)]; }
  std::uint32_t count(int w, int s, int t) const {
    return cells_[(static_cast<std::size_t>(w) * sources_ + s) * bins_ + t];
  }
  std::int64_t bin_count(int w, int t) const;
  int zero_count_bins(int w) const;
  int distinct_sources(int w) const;

  /// Recomputes totals and per-(source, bin) counts from encoded documents.
  void recount(std::span<const Document> docs);

  /// SHA-256 over the word list; model files carry it.
  std::string hash() const;

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::int64_t> totals_;
  std::vector<std::uint32_t> cells_;  // [word][source][bin]
  int sources_ = 0;
  int bins_ = 0;
};

/// Words with total count >= min_count ranked by descending count (ties
/// lexicographic), truncated to `cap`. Throws when nothing survives.
Vocabulary build_vocab(std::span<const TextDocument> docs, const SourceTable& sources,
                       int bins, int cap, int min_count);

/// Re-encodes against `vocab`, dropping OOV tokens and documents left empty,
/// then fills the vocabulary counts.
std::vector<Document> encode_documents(std::span<const TextDocument> docs, const SourceTable& sources,
                                       Vocabulary& vocab);

/// Removes whole documents, in seeded random order, from every (source, bin)
/// cell whose token count exceeds `per_cell_cap` until it no longer does.
std::vector<Document> cap_tokens(std::vector<Document> docs, int sources, int bins,
                                 std::int64_t per_cell_cap, std::uint64_t seed);

/// Token count per (source, bin), row-major [source][bin].
std::vector<std::int64_t> cell_token_counts(std::span<const Document> docs, int sources, int bins);

struct EncodedCorpus {
  TimeBinning binning;
  SourceTable sources;
  Vocabulary vocab;
  std::vector<Document> docs;

  int bins() const { return binning.bins(); }
  int num_sources() const { return sources.size(); }
  std::int64_t num_tokens() const;
};

void save_corpus(const EncodedCorpus& corpus, const std::filesystem::path& path);
EncodedCorpus load_corpus(const std::filesystem::path& path);

struct CorpusOptions {
  int bins = 10;
  Date span_start{};
  Date span_end{};
  std::int64_t min_articles = 500;
  int vocab_cap = 50000;
  int min_count = 5;
  int shingle = 8;
  bool dedup = true;
  bool dedup_before_filter = true;
  std::int64_t per_cell_token_cap = 0;  // 0 disables
  std::uint64_t seed = 1;
};

/// End-to-end corpus preparation: normalize, deduplicate, bin, group/filter
/// sources, build the vocabulary and encode. When the span is unset it is
/// taken from the earliest and latest article dates.
EncodedCorpus prepare_corpus(std::span<const RawArticle> articles, const CorpusOptions& options,
                             const std::map<std::string, std::string>& grouping = {},
                             const SubstitutionTable* substitutions = nullptr);

}  // namespace semlead
