#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semlead/corpus.hpp"

namespace semlead {

enum class ModelKind : std::uint8_t { temporal = 0, source_conditional = 1 };

std::string_view to_string(ModelKind kind);
/// Accepts "temporal" and "source" (or "source-conditional").
ModelKind parse_model_kind(std::string_view text);

struct Hyperparams {
  int dims = 100;
  int window = 5;  // each side
  double l2_lambda = 1e-4;
  int negatives = 5;
  double noise_exponent = 0.75;
  double learning_rate = 0.025;
  double min_learning_rate = 1e-4;
  int epochs = 5;
  std::uint64_t seed = 1;

  /// Throws semlead::Error on an invalid combination.
  void validate() const;
};

/// Skipgram parameters with decomposed input vectors:
///
///   u(w, t)    = base[w] + temporal[w, t]
///   u(w, t, s) = base[w] + temporal[w, t] + source[w, t, s]
///
/// Output vectors are shared across time and source. Residual rows exist
/// only for (w, t) and (w, t, s) cells with a nonzero training count; every
/// other residual is structurally zero.
class EmbeddingModel {
 public:
  EmbeddingModel() = default;
  EmbeddingModel(ModelKind kind, int vocab, int bins, int sources, int dims);

  ModelKind kind() const { return kind_; }
  int vocab_size() const { return vocab_; }
  int bins() const { return bins_; }
  int sources() const { return sources_; }
  int dims() const { return dims_; }

  std::span<float> base(int w) { return row(base_, w); }
  std::span<const float> base(int w) const { return row(base_, w); }
  std::span<float> output(int w) { return row(output_, w); }
  std::span<const float> output(int w) const { return row(output_, w); }

  /// Slot of the (w, t) temporal residual, -1 when structurally zero.
  int temporal_slot(int w, int t) const {
    return temporal_index_[static_cast<std::size_t>(w) * bins_ + t];
  }
  /// Slot of the (w, t, s) source residual, -1 when structurally zero or the
  /// model is temporal-only.
  int source_slot(int w, int t, int s) const {
    if (kind_ != ModelKind::source_conditional) return -1;
    return source_index_[(static_cast<std::size_t>(w) * bins_ + t) * sources_ + s];
  }
  std::span<float> temporal(int slot) { return row(temporal_, slot); }
  std::span<const float> temporal(int slot) const { return row(temporal_, slot); }
  std::span<float> source(int slot) { return row(source_, slot); }
  std::span<const float> source(int slot) const { return row(source_, slot); }

  int temporal_slots() const { return static_cast<int>(temporal_keys_.size() / 2); }
  int source_slots() const { return static_cast<int>(source_keys_.size() / 3); }
  /// (w, t) of a temporal slot.
  std::pair<int, int> temporal_key(int slot) const {
    return {temporal_keys_[2 * static_cast<std::size_t>(slot)], temporal_keys_[2 * static_cast<std::size_t>(slot) + 1]};
  }
  /// (w, t, s) of a source slot.
  std::array<int, 3> source_key(int slot) const {
    const auto i = 3 * static_cast<std::size_t>(slot);
    return {source_keys_[i], source_keys_[i + 1], source_keys_[i + 2]};
  }

  /// Appends residual rows (initialized to zero) in ascending key order.
  /// Must be called once, before training.
  void allocate_residuals(const Vocabulary& counts);
  void add_temporal_slot(int w, int t);
  void add_source_slot(int w, int t, int s);

  std::vector<float>& base_table() { return base_; }
  const std::vector<float>& base_table() const { return base_; }
  std::vector<float>& output_table() { return output_; }
  const std::vector<float>& output_table() const { return output_; }
  std::vector<float>& temporal_table() { return temporal_; }
  const std::vector<float>& temporal_table() const { return temporal_; }
  std::vector<float>& source_table() { return source_; }
  const std::vector<float>& source_table() const { return source_; }

  Hyperparams hyper;
  std::string vocab_hash;

  /// Bitwise equality of every table and header field.
  bool identical(const EmbeddingModel& other) const;

 private:
  std::span<const float> row(const std::vector<float>& table, int i) const {
    return {table.data() + static_cast<std::size_t>(i) * dims_, static_cast<std::size_t>(dims_)};
  }
  std::span<float> row(std::vector<float>& table, int i) {
    return std::span<float>(table.data() + static_cast<std::size_t>(i) * dims_, static_cast<std::size_t>(dims_));
  }

  ModelKind kind_ = ModelKind::temporal;
  int vocab_ = 0, bins_ = 0, sources_ = 0, dims_ = 0;
  std::vector<float> base_, output_, temporal_, source_;
  std::vector<std::int32_t> temporal_index_, source_index_;
  std::vector<std::int32_t> temporal_keys_, source_keys_;
};

/// Base and output tables uniform in [-0.5/dims, 0.5/dims] from hyper.seed;
/// residual rows allocated from the vocabulary's cell counts, all zero.
EmbeddingModel init_model(const Vocabulary& vocab, ModelKind kind, const Hyperparams& hyper);

/// Copies base and output tables from `from` and allocates fresh zero
/// residual rows for `counts`. With `copy_temporal`, temporal residual rows
/// present in both are copied too.
EmbeddingModel warm_start(const EmbeddingModel& from, const Vocabulary& counts, ModelKind kind,
                          bool copy_temporal = false);

/// Writes u(w, t[, s]) into `out` (size dims). Supplying a source to a
/// temporal model throws semlead::KindMismatch.
void compose_input(const EmbeddingModel& model, int w, int t, std::optional<int> s, std::span<double> out);
std::vector<double> compose_input(const EmbeddingModel& model, int w, int t, std::optional<int> s = std::nullopt);

/// One (center, context) observation with explicit negatives. `source` is -1
/// for the time-only composition.
struct TrainingPair {
  int center = 0;
  int bin = 0;
  int source = -1;
  int context = 0;
  std::vector<int> negatives;
  double weight = 1.0;
};

/// Mean negative-sampling loss over the batch plus l2_lambda times the squared
/// norm of every residual row touched by a pair with nonzero weight.
double loss(const EmbeddingModel& model, std::span<const TrainingPair> batch);

/// Gradient of loss() keyed by row (word index for base/output, slot index
/// for residuals). Rows not touched by the batch are absent.
struct SparseGradient {
  std::map<int, std::vector<double>> base, output, temporal, source;
};
SparseGradient gradient(const EmbeddingModel& model, std::span<const TrainingPair> batch);

struct TrainOptions {
  /// 1 runs the serial reference kernel (bit-reproducible); more threads run
  /// lock-free parallel SGD.
  int threads = 1;
  bool update_base = true;
  bool update_output = true;
  bool update_temporal = true;
  bool update_source = true;
};

struct TrainReport {
  double final_loss = 0;  // mean data loss per pair over the last epoch
  std::int64_t pairs = 0;  // pairs in the last epoch
  int epochs = 0;
};

/// SGD with negative sampling over every (center, context) pair within the
/// window, truncated at document boundaries. Documents are shuffled per epoch
/// and the learning rate decays linearly to hyper.min_learning_rate. A
/// non-finite parameter after any epoch throws semlead::DivergenceError.
TrainReport train(EmbeddingModel& model, std::span<const Document> docs, const Vocabulary& vocab,
                  const TrainOptions& options = {});

/// Throws DivergenceError naming the first non-finite entry.
void check_finite(const EmbeddingModel& model);

struct Neighbor {
  int word = 0;
  double cosine = 0;
};

/// Unit-normalized u(., t) for every word. Zero vectors stay zero, so their
/// cosine with anything is 0.
class ComposedBin {
 public:
  ComposedBin(const EmbeddingModel& model, int t);

  int bin() const { return bin_; }
  int size() const { return vocab_; }
  std::span<const double> unit(int w) const {
    return {unit_.data() + static_cast<std::size_t>(w) * dims_, static_cast<std::size_t>(dims_)};
  }
  double cosine(int a, int b) const;
  /// Top-k by cosine excluding `w`; ties by smaller index.
  std::vector<Neighbor> nearest(int w, int k) const;

 private:
  int bin_ = 0, vocab_ = 0, dims_ = 0;
  std::vector<double> unit_;
};

std::vector<Neighbor> nearest_neighbors(const EmbeddingModel& model, int w, int t, int k);

void save_model(const EmbeddingModel& model, const std::filesystem::path& path);
EmbeddingModel load_model(const std::filesystem::path& path);

/// Throws semlead::Error when the model was trained on another vocabulary.
void check_vocab(const EmbeddingModel& model, const Vocabulary& vocab);
/// Throws semlead::KindMismatch.
void require_kind(const EmbeddingModel& model, ModelKind kind);

}  // namespace semlead
