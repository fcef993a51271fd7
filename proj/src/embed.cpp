#include "semlead/embed.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "semlead/binio.hpp"
#include "semlead/common.hpp"
#include "semlead/kernels.hpp"
#include "semlead/sampling.hpp"

namespace semlead {

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::temporal ? "temporal" : "source";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "temporal") return ModelKind::temporal;
  if (text == "source" || text == "source-conditional") return ModelKind::source_conditional;
  throw Error("unknown model kind '" + std::string(text) + "' (expected temporal|source)");
}

void Hyperparams::validate() const {
  if (dims <= 0) throw Error("dims must be positive");
  if (window < 1) throw Error("window must be at least 1");
  if (!(l2_lambda >= 0)) throw Error("l2_lambda must be non-negative");
  if (negatives < 1) throw Error("negatives must be at least 1");
  if (!(learning_rate > 0) || !(min_learning_rate >= 0)) throw Error("learning rates must be positive");
  if (epochs < 1) throw Error("epochs must be at least 1");
}

// ---------------------------------------------------------------------------
// model storage

EmbeddingModel::EmbeddingModel(ModelKind kind, int vocab, int bins, int sources, int dims)
    : kind_(kind), vocab_(vocab), bins_(bins), sources_(sources), dims_(dims) {
  if (vocab <= 0 || bins <= 0 || sources <= 0 || dims <= 0) throw Error("model dimensions must be positive");
  const auto v = static_cast<std::size_t>(vocab);
  base_.assign(v * static_cast<std::size_t>(dims), 0.f);
  output_.assign(v * static_cast<std::size_t>(dims), 0.f);
  temporal_index_.assign(v * static_cast<std::size_t>(bins), -1);
  if (kind == ModelKind::source_conditional)
    source_index_.assign(v * static_cast<std::size_t>(bins) * static_cast<std::size_t>(sources), -1);
}

void EmbeddingModel::add_temporal_slot(int w, int t) {
  auto& idx = temporal_index_[static_cast<std::size_t>(w) * bins_ + t];
  if (idx >= 0) return;
  idx = temporal_slots();
  temporal_keys_.push_back(w);
  temporal_keys_.push_back(t);
  temporal_.resize(temporal_.size() + static_cast<std::size_t>(dims_), 0.f);
}

void EmbeddingModel::add_source_slot(int w, int t, int s) {
  if (kind_ != ModelKind::source_conditional) throw KindMismatch("temporal model has no source residuals");
  auto& idx = source_index_[(static_cast<std::size_t>(w) * bins_ + t) * sources_ + s];
  if (idx >= 0) return;
  idx = source_slots();
  source_keys_.push_back(w);
  source_keys_.push_back(t);
  source_keys_.push_back(s);
  source_.resize(source_.size() + static_cast<std::size_t>(dims_), 0.f);
}

void EmbeddingModel::allocate_residuals(const Vocabulary& counts) {
  if (counts.size() != vocab_ || counts.bins() != bins_ || counts.sources() != sources_)
    throw Error("vocabulary layout does not match the model");
  for (int w = 0; w < vocab_; ++w) {
    for (int t = 0; t < bins_; ++t) {
      if (counts.bin_count(w, t) == 0) continue;
      add_temporal_slot(w, t);
      if (kind_ != ModelKind::source_conditional) continue;
      for (int s = 0; s < sources_; ++s)
        if (counts.count(w, s, t) > 0) add_source_slot(w, t, s);
    }
  }
}

bool EmbeddingModel::identical(const EmbeddingModel& o) const {
  auto same = [](const std::vector<float>& a, const std::vector<float>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
  };
  return kind_ == o.kind_ && vocab_ == o.vocab_ && bins_ == o.bins_ && sources_ == o.sources_ &&
         dims_ == o.dims_ && vocab_hash == o.vocab_hash && same(base_, o.base_) && same(output_, o.output_) &&
         same(temporal_, o.temporal_) && same(source_, o.source_) && temporal_keys_ == o.temporal_keys_ &&
         source_keys_ == o.source_keys_;
}

EmbeddingModel init_model(const Vocabulary& vocab, ModelKind kind, const Hyperparams& hyper) {
  hyper.validate();
  if (vocab.size() == 0) throw Error("cannot initialize a model over an empty vocabulary");
  EmbeddingModel m(kind, vocab.size(), vocab.bins(), vocab.sources(), hyper.dims);
  m.hyper = hyper;
  m.vocab_hash = vocab.hash();
  Rng rng(derive_seed(hyper.seed, {0x1a17}));
  const float half = 0.5f / static_cast<float>(hyper.dims);
  std::uniform_real_distribution<float> init(-half, half);
  for (auto& x : m.base_table()) x = init(rng);
  for (auto& x : m.output_table()) x = init(rng);
  m.allocate_residuals(vocab);
  return m;
}

EmbeddingModel warm_start(const EmbeddingModel& from, const Vocabulary& counts, ModelKind kind,
                          bool copy_temporal) {
  EmbeddingModel m(kind, from.vocab_size(), from.bins(), from.sources(), from.dims());
  m.hyper = from.hyper;
  m.vocab_hash = from.vocab_hash;
  m.base_table() = from.base_table();
  m.output_table() = from.output_table();
  m.allocate_residuals(counts);
  if (copy_temporal) {
    for (int slot = 0; slot < m.temporal_slots(); ++slot) {
      auto [w, t] = m.temporal_key(slot);
      int src = from.temporal_slot(w, t);
      if (src >= 0) std::ranges::copy(from.temporal(src), m.temporal(slot).begin());
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// composition

void compose_input(const EmbeddingModel& m, int w, int t, std::optional<int> s, std::span<double> out) {
  if (w < 0 || w >= m.vocab_size() || t < 0 || t >= m.bins())
    throw Error("compose_input: word or bin out of range");
  if (s && m.kind() != ModelKind::source_conditional)
    throw KindMismatch("compose_input: a source was supplied to a temporal model");
  if (s && (*s < 0 || *s >= m.sources())) throw Error("compose_input: source out of range");
  if (out.size() != static_cast<std::size_t>(m.dims())) throw Error("compose_input: output size mismatch");

  auto a = m.base(w);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = a[k];
  if (int slot = m.temporal_slot(w, t); slot >= 0) {
    auto r = m.temporal(slot);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += r[k];
  }
  if (s) {
    if (int slot = m.source_slot(w, t, *s); slot >= 0) {
      auto q = m.source(slot);
      for (std::size_t k = 0; k < out.size(); ++k) out[k] += q[k];
    }
  }
}

std::vector<double> compose_input(const EmbeddingModel& m, int w, int t, std::optional<int> s) {
  std::vector<double> out(static_cast<std::size_t>(m.dims()));
  compose_input(m, w, t, s, out);
  return out;
}

// ---------------------------------------------------------------------------
// loss and gradient (double-precision reference used by the gradient check)

namespace {

double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }
double sigmoid(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

double dot(std::span<const float> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += static_cast<double>(a[k]) * b[k];
  return s;
}

void check_pair(const EmbeddingModel& m, const TrainingPair& p) {
  auto in_vocab = [&](int w) { return w >= 0 && w < m.vocab_size(); };
  if (!in_vocab(p.center) || !in_vocab(p.context) || p.bin < 0 || p.bin >= m.bins())
    throw Error("training pair out of range");
  for (int n : p.negatives)
    if (!in_vocab(n)) throw Error("negative sample out of range");
}

std::optional<int> pair_source(const TrainingPair& p) {
  return p.source >= 0 ? std::optional<int>(p.source) : std::nullopt;
}

}  // namespace

double loss(const EmbeddingModel& m, std::span<const TrainingPair> batch) {
  if (batch.empty()) throw Error("loss: empty batch");
  std::vector<double> u(static_cast<std::size_t>(m.dims()));
  std::set<int> temporal_touched, source_touched;
  double data = 0;
  for (const auto& p : batch) {
    check_pair(m, p);
    compose_input(m, p.center, p.bin, pair_source(p), u);
    if (p.weight == 0) continue;
    double l = -log_sigmoid(dot(m.output(p.context), u));
    for (int n : p.negatives) l -= log_sigmoid(-dot(m.output(n), u));
    data += p.weight * l;
    if (int slot = m.temporal_slot(p.center, p.bin); slot >= 0) temporal_touched.insert(slot);
    if (p.source >= 0)
      if (int slot = m.source_slot(p.center, p.bin, p.source); slot >= 0) source_touched.insert(slot);
  }
  double reg = 0;
  for (int slot : temporal_touched)
    for (float x : m.temporal(slot)) reg += static_cast<double>(x) * x;
  for (int slot : source_touched)
    for (float x : m.source(slot)) reg += static_cast<double>(x) * x;
  return data / static_cast<double>(batch.size()) + m.hyper.l2_lambda * reg;
}

SparseGradient gradient(const EmbeddingModel& m, std::span<const TrainingPair> batch) {
  if (batch.empty()) throw Error("gradient: empty batch");
  const auto d = static_cast<std::size_t>(m.dims());
  SparseGradient g;
  auto acc = [d](std::map<int, std::vector<double>>& table, int key) -> std::vector<double>& {
    auto& row = table[key];
    if (row.empty()) row.assign(d, 0.0);
    return row;
  };
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  std::vector<double> u(d), gu(d);
  for (const auto& p : batch) {
    check_pair(m, p);
    compose_input(m, p.center, p.bin, pair_source(p), u);
    if (p.weight == 0) continue;
    const double scale = p.weight * inv_n;
    std::fill(gu.begin(), gu.end(), 0.0);

    auto visit = [&](int x, double label) {
      auto b = m.output(x);
      const double coeff = scale * (sigmoid(dot(b, u)) - label);  // d loss / d (b.u)
      auto& gb = acc(g.output, x);
      for (std::size_t k = 0; k < d; ++k) {
        gu[k] += coeff * b[k];
        gb[k] += coeff * u[k];
      }
    };
    visit(p.context, 1.0);
    for (int n : p.negatives) visit(n, 0.0);

    auto add = [&](std::vector<double>& row) {
      for (std::size_t k = 0; k < d; ++k) row[k] += gu[k];
    };
    add(acc(g.base, p.center));
    if (int slot = m.temporal_slot(p.center, p.bin); slot >= 0) add(acc(g.temporal, slot));
    if (p.source >= 0)
      if (int slot = m.source_slot(p.center, p.bin, p.source); slot >= 0) add(acc(g.source, slot));
  }
  const double two_lambda = 2.0 * m.hyper.l2_lambda;
  for (auto& [slot, row] : g.temporal) {
    auto r = m.temporal(slot);
    for (std::size_t k = 0; k < d; ++k) row[k] += two_lambda * r[k];
  }
  for (auto& [slot, row] : g.source) {
    auto q = m.source(slot);
    for (std::size_t k = 0; k < d; ++k) row[k] += two_lambda * q[k];
  }
  return g;
}

// ---------------------------------------------------------------------------
// training

void check_finite(const EmbeddingModel& m) {
  auto scan = [&](const std::vector<float>& table, const char* name) {
    for (std::size_t i = 0; i < table.size(); ++i) {
      if (!std::isfinite(table[i])) {
        std::ostringstream msg;
        msg << "training diverged: non-finite value in " << name << " table at row "
            << i / static_cast<std::size_t>(m.dims()) << ", component " << i % static_cast<std::size_t>(m.dims())
            << " (learning_rate=" << m.hyper.learning_rate << ", l2_lambda=" << m.hyper.l2_lambda << ")";
        throw DivergenceError(msg.str());
      }
    }
  };
  scan(m.base_table(), "base");
  scan(m.output_table(), "output");
  scan(m.temporal_table(), "temporal residual");
  scan(m.source_table(), "source residual");
}

TrainReport train(EmbeddingModel& model, std::span<const Document> docs, const Vocabulary& vocab,
                  const TrainOptions& options) {
  model.hyper.validate();
  if (vocab.size() != model.vocab_size()) throw Error("train: vocabulary size does not match the model");
  if (options.threads < 1) throw Error("train: thread count must be positive");
  std::vector<std::int64_t> totals(static_cast<std::size_t>(vocab.size()));
  for (int w = 0; w < vocab.size(); ++w) totals[static_cast<std::size_t>(w)] = vocab.total(w);
  auto noise = make_noise_sampler(totals, model.hyper.noise_exponent);
  return options.threads == 1 ? kernels::sgd_serial(model, docs, noise, options)
                              : kernels::sgd_hogwild(model, docs, noise, options);
}

// ---------------------------------------------------------------------------
// neighbors

ComposedBin::ComposedBin(const EmbeddingModel& m, int t) : bin_(t), vocab_(m.vocab_size()), dims_(m.dims()) {
  const auto d = static_cast<std::size_t>(dims_);
  unit_.resize(static_cast<std::size_t>(vocab_) * d);
  for (int w = 0; w < vocab_; ++w) {
    std::span<double> row(unit_.data() + static_cast<std::size_t>(w) * d, d);
    compose_input(m, w, t, std::nullopt, row);
    double n = 0;
    for (double x : row) n += x * x;
    n = std::sqrt(n);
    if (n > 0)
      for (double& x : row) x /= n;
    else
      std::fill(row.begin(), row.end(), 0.0);
  }
}

double ComposedBin::cosine(int a, int b) const {
  auto x = unit(a), y = unit(b);
  double s = 0;
  for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * y[k];
  return s;
}

std::vector<Neighbor> ComposedBin::nearest(int w, int k) const {
  std::vector<Neighbor> all;
  all.reserve(static_cast<std::size_t>(vocab_));
  for (int v = 0; v < vocab_; ++v)
    if (v != w) all.push_back({v, cosine(w, v)});
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 0)), all.size());
  auto better = [](const Neighbor& a, const Neighbor& b) {
    return a.cosine != b.cosine ? a.cosine > b.cosine : a.word < b.word;
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(), better);
  all.resize(take);
  return all;
}

std::vector<Neighbor> nearest_neighbors(const EmbeddingModel& model, int w, int t, int k) {
  if (k >= model.vocab_size()) throw Error("nearest_neighbors: k must be smaller than the vocabulary");
  return ComposedBin(model, t).nearest(w, k);
}

// ---------------------------------------------------------------------------
// persistence

namespace {
constexpr char kModelMagic[8] = {'S', 'L', 'E', 'M', 'B', 'E', 'D', '1'};
constexpr char kModelEnd[8] = {'S', 'L', 'E', 'N', 'D', '0', '0', '1'};
constexpr std::uint32_t kModelVersion = 1;
}  // namespace

void save_model(const EmbeddingModel& m, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot write " + path.string());
  binio::Writer w(os);
  w.put_raw(kModelMagic, sizeof kModelMagic);
  w.put<std::uint32_t>(kModelVersion);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(m.kind()));
  w.put<std::int32_t>(m.vocab_size());
  w.put<std::int32_t>(m.bins());
  w.put<std::int32_t>(m.sources());
  w.put<std::int32_t>(m.dims());
  const auto& h = m.hyper;
  w.put<std::int32_t>(h.window);
  w.put<double>(h.l2_lambda);
  w.put<std::int32_t>(h.negatives);
  w.put<double>(h.noise_exponent);
  w.put<double>(h.learning_rate);
  w.put<double>(h.min_learning_rate);
  w.put<std::int32_t>(h.epochs);
  w.put<std::uint64_t>(h.seed);
  w.put_string(m.vocab_hash);
  w.put_raw(m.base_table().data(), m.base_table().size() * sizeof(float));
  w.put_raw(m.output_table().data(), m.output_table().size() * sizeof(float));

  const auto d = static_cast<std::size_t>(m.dims());
  w.put<std::uint64_t>(static_cast<std::uint64_t>(m.temporal_slots()));
  for (int slot = 0; slot < m.temporal_slots(); ++slot) {
    auto [wi, t] = m.temporal_key(slot);
    w.put<std::int32_t>(wi);
    w.put<std::int32_t>(t);
    w.put_raw(m.temporal(slot).data(), d * sizeof(float));
  }
  w.put<std::uint64_t>(static_cast<std::uint64_t>(m.source_slots()));
  for (int slot = 0; slot < m.source_slots(); ++slot) {
    auto key = m.source_key(slot);
    for (int x : key) w.put<std::int32_t>(x);
    w.put_raw(m.source(slot).data(), d * sizeof(float));
  }
  w.put_raw(kModelEnd, sizeof kModelEnd);
  if (!os) throw Error("failed writing " + path.string());
}

EmbeddingModel load_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot read model " + path.string());
  binio::Reader r(is, "model " + path.string());
  char magic[8];
  r.get_raw(magic, sizeof magic);
  if (!std::equal(std::begin(magic), std::end(magic), std::begin(kModelMagic))) r.fail("bad magic");
  if (r.get<std::uint32_t>() != kModelVersion) r.fail("unsupported version");
  auto kind_byte = r.get<std::uint8_t>();
  if (kind_byte > 1) r.fail("unknown model kind");
  const int V = r.get<std::int32_t>(), T = r.get<std::int32_t>(), S = r.get<std::int32_t>(),
            D = r.get<std::int32_t>();
  if (V <= 0 || T <= 0 || S <= 0 || D <= 0 || V > (1 << 26) || T > 10000 || S > 100000 || D > 100000)
    r.fail("header dimensions out of range");

  EmbeddingModel m(static_cast<ModelKind>(kind_byte), V, T, S, D);
  auto& h = m.hyper;
  h.dims = D;
  h.window = r.get<std::int32_t>();
  h.l2_lambda = r.get<double>();
  h.negatives = r.get<std::int32_t>();
  h.noise_exponent = r.get<double>();
  h.learning_rate = r.get<double>();
  h.min_learning_rate = r.get<double>();
  h.epochs = r.get<std::int32_t>();
  h.seed = r.get<std::uint64_t>();
  try {
    h.validate();
  } catch (const Error& e) {
    r.fail(std::string("invalid hyperparameters: ") + e.what());
  }
  m.vocab_hash = r.get_string(256);
  r.get_raw(m.base_table().data(), m.base_table().size() * sizeof(float));
  r.get_raw(m.output_table().data(), m.output_table().size() * sizeof(float));

  const auto d = static_cast<std::size_t>(D);
  auto nt = r.get<std::uint64_t>();
  if (nt > static_cast<std::uint64_t>(V) * static_cast<std::uint64_t>(T)) r.fail("temporal section too large");
  std::int64_t prev = -1;
  for (std::uint64_t i = 0; i < nt; ++i) {
    int w = r.get<std::int32_t>(), t = r.get<std::int32_t>();
    if (w < 0 || w >= V || t < 0 || t >= T) r.fail("temporal key out of range");
    std::int64_t key = static_cast<std::int64_t>(w) * T + t;
    if (key <= prev) r.fail("temporal keys not strictly increasing");
    prev = key;
    m.add_temporal_slot(w, t);
    r.get_raw(m.temporal(static_cast<int>(i)).data(), d * sizeof(float));
  }
  auto ns = r.get<std::uint64_t>();
  if (m.kind() == ModelKind::temporal && ns != 0) r.fail("temporal model with source residuals");
  if (ns > static_cast<std::uint64_t>(V) * static_cast<std::uint64_t>(T) * static_cast<std::uint64_t>(S))
    r.fail("source section too large");
  prev = -1;
  for (std::uint64_t i = 0; i < ns; ++i) {
    int w = r.get<std::int32_t>(), t = r.get<std::int32_t>(), s = r.get<std::int32_t>();
    if (w < 0 || w >= V || t < 0 || t >= T || s < 0 || s >= S) r.fail("source key out of range");
    std::int64_t key = (static_cast<std::int64_t>(w) * T + t) * S + s;
    if (key <= prev) r.fail("source keys not strictly increasing");
    prev = key;
    m.add_source_slot(w, t, s);
    r.get_raw(m.source(static_cast<int>(i)).data(), d * sizeof(float));
  }
  char end[8];
  r.get_raw(end, sizeof end);
  if (!std::equal(std::begin(end), std::end(end), std::begin(kModelEnd))) r.fail("bad trailer");
  return m;
}

void check_vocab(const EmbeddingModel& model, const Vocabulary& vocab) {
  if (model.vocab_hash != vocab.hash())
    throw Error("model was trained on a different vocabulary (hash " + model.vocab_hash.substr(0, 12) +
                " vs corpus " + vocab.hash().substr(0, 12) + ")");
  if (model.vocab_size() != vocab.size() || model.bins() != vocab.bins() || model.sources() != vocab.sources())
    throw Error("model layout does not match the corpus");
}

void require_kind(const EmbeddingModel& model, ModelKind kind) {
  if (model.kind() != kind)
    throw KindMismatch("expected a " + std::string(to_string(kind)) + " model but got a " +
                       std::string(to_string(model.kind())) + " model");
}

}  // namespace semlead
