#ifndef DEEPCHROMA_NN_HPP
#define DEEPCHROMA_NN_HPP

// Feed-forward networks: dense layers, BCE / softmax cross-entropy losses,
// back-propagation, ADAM, inverted dropout, early stopping and the DCX1
// model format.
//
// Batches are column-major: one sample per column.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "deepchroma/binio.hpp"
#include "deepchroma/error.hpp"

namespace deepchroma {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) built from the top 53 bits of one engine draw.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

enum class Activation : std::uint8_t { relu = 0, sigmoid = 1, softmax = 2, identity = 3 };

struct DenseLayer {
  Matrix weights;  // out x in
  Vector bias;     // out
  Activation activation = Activation::identity;

  Eigen::Index in_dim() const { return weights.cols(); }
  Eigen::Index out_dim() const { return weights.rows(); }
};

struct MLPModel {
  std::vector<DenseLayer> layers;
  std::uint32_t context_frames = 1;
  // Bumped on every parameter update so stale forward caches can be detected.
  std::uint64_t revision = 0;

  Eigen::Index input_dim() const { return layers.empty() ? 0 : layers.front().in_dim(); }
  Eigen::Index output_dim() const { return layers.empty() ? 0 : layers.back().out_dim(); }

  void validate() const {
    if (layers.empty()) throw DataError("model has no layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& L = layers[l];
      if (L.bias.size() != L.out_dim()) throw DataError("layer " + std::to_string(l) + ": bias size mismatch");
      if (l > 0 && L.in_dim() != layers[l - 1].out_dim())
        throw DataError("layer " + std::to_string(l) + ": input dim does not chain");
      if (!L.weights.allFinite() || !L.bias.allFinite())
        throw DataError("layer " + std::to_string(l) + ": non-finite parameters");
      if (l + 1 < layers.size() && L.activation == Activation::softmax)
        throw DataError("softmax is only supported on the output layer");
    }
  }
};

/// Hidden layers He-uniform, output layer Glorot-uniform, zero biases.
inline MLPModel make_mlp(std::span<const int> sizes, Activation hidden, Activation output, std::uint64_t seed,
                         std::uint32_t context_frames = 1) {
  if (sizes.size() < 2) throw UsageError("make_mlp: need at least input and output sizes");
  Rng rng(seed);
  MLPModel m;
  m.context_frames = context_frames;
  for (std::size_t l = 1; l < sizes.size(); ++l) {
    const int fan_in = sizes[l - 1];
    const int fan_out = sizes[l];
    if (fan_in <= 0 || fan_out <= 0) throw UsageError("make_mlp: layer sizes must be positive");
    const bool is_output = l + 1 == sizes.size();
    const double limit = is_output ? std::sqrt(6.0 / (fan_in + fan_out)) : std::sqrt(6.0 / fan_in);
    DenseLayer layer;
    layer.weights.resize(fan_out, fan_in);
    for (Eigen::Index j = 0; j < layer.weights.cols(); ++j)
      for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) layer.weights(i, j) = (2.0 * uniform01(rng) - 1.0) * limit;
    layer.bias = Vector::Zero(fan_out);
    layer.activation = is_output ? output : hidden;
    m.layers.push_back(std::move(layer));
  }
  return m;
}

enum class Mode { train, infer };

struct Activations {
  std::vector<Matrix> pre;    // per layer, W h + b
  std::vector<Matrix> post;   // post[0] = input, post[l + 1] = output of layer l (after dropout)
  std::vector<Matrix> masks;  // per hidden layer in train mode: 0 or 1 / (1 - p)
  Mode mode = Mode::infer;
  const MLPModel* model = nullptr;
  std::uint64_t revision = 0;

  const Matrix& output() const { return post.back(); }
};

inline void apply_activation(Activation a, const Matrix& z, Matrix& out) {
  switch (a) {
    case Activation::relu:
      out = z.cwiseMax(0.0);
      break;
    case Activation::sigmoid:
      out = (1.0 + (-z.array()).exp()).inverse().matrix();
      break;
    case Activation::identity:
      out = z;
      break;
    case Activation::softmax: {
      out.resize(z.rows(), z.cols());
      for (Eigen::Index c = 0; c < z.cols(); ++c) {
        const double mx = z.col(c).maxCoeff();
        out.col(c) = (z.col(c).array() - mx).exp().matrix();
        out.col(c) /= out.col(c).sum();
      }
      break;
    }
  }
}

/// Runs the network on x (input_dim x batch). In train mode an inverted dropout
/// mask is applied after every hidden layer; infer mode never touches `rng`.
inline Activations forward(const MLPModel& model, const Matrix& x, Mode mode = Mode::infer, double dropout_p = 0.0,
                           Rng* rng = nullptr) {
  if (model.layers.empty()) throw UsageError("forward: empty model");
  if (x.rows() != model.input_dim())
    throw UsageError("forward: input has " + std::to_string(x.rows()) + " rows, model expects " +
                     std::to_string(model.input_dim()));
  const bool drop = mode == Mode::train && dropout_p > 0.0;
  if (drop && (dropout_p >= 1.0 || rng == nullptr)) throw UsageError("forward: dropout needs p < 1 and a generator");

  Activations acts;
  acts.mode = mode;
  acts.model = &model;
  acts.revision = model.revision;
  acts.post.reserve(model.layers.size() + 1);
  acts.post.push_back(x);
  const double keep_scale = drop ? 1.0 / (1.0 - dropout_p) : 1.0;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    Matrix z = layer.weights * acts.post.back();
    z.colwise() += layer.bias;
    Matrix h;
    apply_activation(layer.activation, z, h);
    const bool hidden = l + 1 < model.layers.size();
    if (drop && hidden) {
      Matrix mask(h.rows(), h.cols());
      for (Eigen::Index j = 0; j < mask.cols(); ++j)
        for (Eigen::Index i = 0; i < mask.rows(); ++i) mask(i, j) = uniform01(*rng) < dropout_p ? 0.0 : keep_scale;
      h.array() *= mask.array();
      acts.masks.push_back(std::move(mask));
    }
    acts.pre.push_back(std::move(z));
    acts.post.push_back(std::move(h));
  }
  if (!acts.post.back().allFinite()) throw DivergenceError("forward: non-finite activation");
  return acts;
}

/// Inference over a batch; returns output_dim x batch.
inline Matrix predict(const MLPModel& model, const Matrix& x) { return forward(model, x, Mode::infer).output(); }

struct LossResult {
  double value = 0.0;
  Matrix grad;  // d loss / d output-layer pre-activation
};

inline constexpr double kProbabilityClamp = 1e-7;

/// Mean over the batch of the per-sample binary cross-entropy averaged over
/// output units. p are sigmoid outputs.
inline LossResult bce_loss(const Matrix& p, const Matrix& t) {
  if (p.rows() != t.rows() || p.cols() != t.cols()) throw UsageError("bce_loss: shape mismatch");
  const double units = static_cast<double>(p.rows());
  const double batch = static_cast<double>(p.cols());
  const auto pc = p.array().max(kProbabilityClamp).min(1.0 - kProbabilityClamp);
  const double total = -(t.array() * pc.log() + (1.0 - t.array()) * (1.0 - pc).log()).sum();
  return {total / (units * batch), (p - t) / (units * batch)};
}

/// Mean softmax cross-entropy over the batch, from output-layer logits.
inline LossResult softmax_ce_loss(const Matrix& logits, std::span<const int> classes) {
  if (static_cast<Eigen::Index>(classes.size()) != logits.cols()) throw UsageError("softmax_ce_loss: batch size mismatch");
  const double batch = static_cast<double>(logits.cols());
  LossResult r;
  apply_activation(Activation::softmax, logits, r.grad);
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const int k = classes[static_cast<std::size_t>(c)];
    if (k < 0 || k >= logits.rows()) throw UsageError("softmax_ce_loss: class index out of range");
    const double mx = logits.col(c).maxCoeff();
    const double lse = mx + std::log((logits.col(c).array() - mx).exp().sum());
    r.value += lse - logits(k, c);
    r.grad(k, c) -= 1.0;
  }
  r.value /= batch;
  r.grad /= batch;
  return r;
}

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> bias;
};

/// Exact parameter gradients given d loss / d output logits; replays dropout masks.
inline Gradients backward(const MLPModel& model, const Activations& acts, const Matrix& output_grad) {
  if (acts.model != &model || acts.revision != model.revision || acts.pre.size() != model.layers.size())
    throw UsageError("backward: stale activation cache");
  const std::size_t n = model.layers.size();
  if (output_grad.rows() != model.output_dim() || output_grad.cols() != acts.output().cols())
    throw UsageError("backward: gradient shape mismatch");
  Gradients g;
  g.weights.resize(n);
  g.bias.resize(n);
  Matrix delta = output_grad;
  for (std::size_t l = n; l-- > 0;) {
    g.weights[l].noalias() = delta * acts.post[l].transpose();
    g.bias[l] = delta.rowwise().sum();
    if (l == 0) break;
    Matrix up = model.layers[l].weights.transpose() * delta;
    if (!acts.masks.empty()) up.array() *= acts.masks[l - 1].array();
    const Matrix& z = acts.pre[l - 1];
    switch (model.layers[l - 1].activation) {
      case Activation::relu:
        up.array() *= (z.array() > 0.0).cast<double>();
        break;
      case Activation::sigmoid: {
        const Eigen::ArrayXXd s = (1.0 + (-z.array()).exp()).inverse();
        up.array() *= s * (1.0 - s);
        break;
      }
      case Activation::identity:
        break;
      case Activation::softmax:
        throw UsageError("backward: softmax hidden layer");
    }
    delta = std::move(up);
  }
  return g;
}

struct AdamConfig {
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One ADAM update of a flat parameter block. `t` is the already-incremented step.
inline void adam_update(std::span<double> theta, std::span<const double> grad, std::span<double> m, std::span<double> v,
                        long long t, const AdamConfig& cfg) {
  if (theta.size() != grad.size() || m.size() != theta.size() || v.size() != theta.size())
    throw UsageError("adam_update: shape mismatch");
  if (t < 1) throw UsageError("adam_update: step counter must be >= 1");
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = grad[i];
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
    theta[i] -= cfg.alpha * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.eps);
  }
}

struct AdamState {
  AdamConfig config;
  std::vector<Matrix> m_w, v_w;
  std::vector<Vector> m_b, v_b;
  long long t = 0;

  static AdamState for_model(const MLPModel& model, AdamConfig cfg = {}) {
    AdamState s;
    s.config = cfg;
    for (const auto& L : model.layers) {
      s.m_w.push_back(Matrix::Zero(L.weights.rows(), L.weights.cols()));
      s.v_w.push_back(Matrix::Zero(L.weights.rows(), L.weights.cols()));
      s.m_b.push_back(Vector::Zero(L.bias.size()));
      s.v_b.push_back(Vector::Zero(L.bias.size()));
    }
    return s;
  }
};

namespace detail {
template <typename Derived>
std::span<double> flat(Eigen::PlainObjectBase<Derived>& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
template <typename Derived>
std::span<const double> flat(const Eigen::PlainObjectBase<Derived>& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
}  // namespace detail

inline void adam_step(MLPModel& model, const Gradients& grads, AdamState& state) {
  if (grads.weights.size() != model.layers.size() || state.m_w.size() != model.layers.size())
    throw UsageError("adam_step: layer count mismatch");
  for (std::size_t l = 0; l < model.layers.size(); ++l)
    if (!grads.weights[l].allFinite() || !grads.bias[l].allFinite())
      throw DivergenceError("adam_step: non-finite gradient in layer " + std::to_string(l));
  ++state.t;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    auto& L = model.layers[l];
    adam_update(detail::flat(L.weights), detail::flat(grads.weights[l]), detail::flat(state.m_w[l]),
                detail::flat(state.v_w[l]), state.t, state.config);
    adam_update(detail::flat(L.bias), detail::flat(grads.bias[l]), detail::flat(state.m_b[l]),
                detail::flat(state.v_b[l]), state.t, state.config);
  }
  ++model.revision;
}

/// Per-feature affine map x -> (x - shift) * scale, applied to gathered windows.
struct InputAffine {
  Vector shift;
  Vector scale;
};

/// A set of frame sequences exposed as context windows: sample (s, t) is rows
/// t - per_side .. t + per_side of sequence s, concatenated, zero-padded. An
/// optional affine map is applied after gathering, padding included.
class WindowedFrames {
 public:
  WindowedFrames() = default;
  explicit WindowedFrames(int per_side) : per_side_(per_side) {
    if (per_side < 0) throw UsageError("WindowedFrames: negative context");
  }

  void add(RowMatrix frames) {
    if (!sequences_.empty() && frames.cols() != sequences_.front().cols())
      throw UsageError("WindowedFrames: feature dimension mismatch between sequences");
    const auto s = static_cast<std::uint32_t>(sequences_.size());
    for (Eigen::Index t = 0; t < frames.rows(); ++t) positions_.push_back({s, static_cast<std::uint32_t>(t)});
    sequences_.push_back(std::move(frames));
  }

  int per_side() const { return per_side_; }
  int window() const { return 2 * per_side_ + 1; }
  std::size_t size() const { return positions_.size(); }
  Eigen::Index base_dim() const { return sequences_.empty() ? 0 : sequences_.front().cols(); }
  Eigen::Index dim() const { return window() * base_dim(); }
  const std::vector<RowMatrix>& sequences() const { return sequences_; }

  void set_affine(InputAffine affine) {
    if (affine.shift.size() != base_dim() || affine.scale.size() != base_dim())
      throw UsageError("WindowedFrames: affine map does not match feature dimension");
    affine_ = std::move(affine);
  }
  const std::optional<InputAffine>& affine() const { return affine_; }

  /// Writes the requested samples as columns of `out` (dim x rows.size()).
  void gather(std::span<const std::size_t> rows, Matrix& out) const {
    const Eigen::Index d = base_dim();
    out.setZero(dim(), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t c = 0; c < rows.size(); ++c) {
      const auto [s, t] = positions_.at(rows[c]);
      const RowMatrix& seq = sequences_[s];
      for (int k = 0; k < window(); ++k) {
        const long src = static_cast<long>(t) + k - per_side_;
        if (src >= 0 && src < seq.rows())
          out.block(k * d, static_cast<Eigen::Index>(c), d, 1) = seq.row(src).transpose();
      }
    }
    if (affine_)
      for (int k = 0; k < window(); ++k) {
        auto blk = out.middleRows(k * d, d);
        blk.colwise() -= affine_->shift;
        blk.array().colwise() *= affine_->scale.array();
      }
  }

 private:
  int per_side_ = 0;
  std::vector<RowMatrix> sequences_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> positions_;
  std::optional<InputAffine> affine_;
};

/// Per-feature mean and inverse standard deviation over every frame of every
/// sequence. Constant features get scale 1.
inline InputAffine fit_standardizer(const WindowedFrames& frames) {
  const Eigen::Index d = frames.base_dim();
  Vector sum = Vector::Zero(d), sq = Vector::Zero(d);
  double n = 0.0;
  for (const auto& seq : frames.sequences()) {
    sum += seq.colwise().sum().transpose();
    sq += seq.array().square().colwise().sum().matrix().transpose();
    n += static_cast<double>(seq.rows());
  }
  if (n == 0.0) throw UsageError("fit_standardizer: no frames");
  InputAffine a;
  a.shift = sum / n;
  a.scale.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double var = std::max(0.0, sq[i] / n - a.shift[i] * a.shift[i]);
    a.scale[i] = var > 1e-12 ? 1.0 / std::sqrt(var) : 1.0;
  }
  return a;
}

/// Absorbs an input affine map (tiled over `window` frames) into the first
/// layer so the model consumes raw features.
inline void fold_input_affine(MLPModel& model, const InputAffine& a, int window) {
  auto& first = model.layers.front();
  if (first.in_dim() != window * a.shift.size()) throw UsageError("fold_input_affine: dimension mismatch");
  Vector shift(first.in_dim()), scale(first.in_dim());
  for (int k = 0; k < window; ++k) {
    shift.segment(k * a.shift.size(), a.shift.size()) = a.shift;
    scale.segment(k * a.scale.size(), a.scale.size()) = a.scale;
  }
  first.weights = first.weights * scale.asDiagonal();
  first.bias -= first.weights * shift;
  ++model.revision;
}

enum class LossKind : std::uint8_t { bce, softmax_ce };

struct TrainConfig {
  std::size_t batch_size = 512;
  double dropout_p = 0.5;
  int patience = 20;
  int max_epochs = 500;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::bce;
  double l2 = 0.0;  // penalty (l2 / 2) * ||W||^2 on weights, not biases
  AdamConfig adam;
};

/// Training or validation samples: windows plus either chroma targets (bce) or
/// class labels (softmax_ce). `index` selects the usable sample positions.
struct TrainingSet {
  WindowedFrames inputs;
  RowMatrix targets;         // size() x output_dim, bce
  std::vector<int> labels;   // size(), softmax_ce; negative = unusable
  std::vector<std::size_t> index;

  void select_all() {
    index.clear();
    for (std::size_t i = 0; i < inputs.size(); ++i)
      if (labels.empty() || labels[i] >= 0) index.push_back(i);
  }
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_metric = 0.0;
};

struct TrainResult {
  MLPModel model;
  std::vector<EpochStats> history;
  int best_epoch = 0;
  double best_metric = 0.0;
};

/// Model outputs for the selected samples, in `index` order (output_dim x n).
inline Matrix predict_set(const MLPModel& model, const TrainingSet& set, std::size_t batch = 1024) {
  Matrix out(model.output_dim(), static_cast<Eigen::Index>(set.index.size()));
  Matrix x;
  for (std::size_t b = 0; b < set.index.size(); b += batch) {
    const std::size_t n = std::min(batch, set.index.size() - b);
    set.inputs.gather(std::span(set.index).subspan(b, n), x);
    out.middleCols(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(n)) = predict(model, x);
  }
  return out;
}

/// Bitwise accuracy of outputs thresholded at 0.5 (bce) or frame accuracy (softmax_ce).
inline double validation_metric(const MLPModel& model, const TrainingSet& set, LossKind loss) {
  if (set.index.empty()) throw UsageError("validation_metric: empty set");
  const Matrix out = predict_set(model, set);
  double hits = 0.0;
  for (std::size_t c = 0; c < set.index.size(); ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    const std::size_t i = set.index[c];
    if (loss == LossKind::bce) {
      for (Eigen::Index u = 0; u < out.rows(); ++u)
        hits += ((out(u, col) > 0.5) == (set.targets(static_cast<Eigen::Index>(i), u) > 0.5)) ? 1.0 : 0.0;
    } else {
      Eigen::Index best = 0;
      out.col(col).maxCoeff(&best);
      hits += best == set.labels[i] ? 1.0 : 0.0;
    }
  }
  const double denom = static_cast<double>(set.index.size()) * (loss == LossKind::bce ? static_cast<double>(out.rows()) : 1.0);
  return hits / denom;
}

/// Mini-batch ADAM training with early stopping on the validation metric.
/// Returns the weights of the best validation epoch.
inline TrainResult train(MLPModel model, const TrainingSet& train_set, const TrainingSet& val_set, const TrainConfig& cfg) {
  model.validate();
  if (train_set.index.empty() || val_set.index.empty()) throw UsageError("train: empty training or validation set");
  if (cfg.batch_size < 1) throw UsageError("train: batch_size must be >= 1");
  if (cfg.dropout_p < 0.0 || cfg.dropout_p >= 1.0) throw UsageError("train: dropout_p must be in [0, 1)");
  if (train_set.inputs.dim() != model.input_dim()) throw UsageError("train: input dimension does not match model");
  if (cfg.loss == LossKind::bce && train_set.targets.cols() != model.output_dim())
    throw UsageError("train: target dimension does not match model");

  Rng rng(cfg.seed);
  AdamState adam = AdamState::for_model(model, cfg.adam);
  TrainResult result;
  result.model = model;
  result.best_metric = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> order = train_set.index;
  Matrix x, targets;
  std::vector<int> classes;
  int since_best = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);

    double loss_sum = 0.0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      const std::size_t n = std::min(cfg.batch_size, order.size() - b);
      const auto rows = std::span(order).subspan(b, n);
      train_set.inputs.gather(rows, x);
      const Activations acts = forward(model, x, Mode::train, cfg.dropout_p, &rng);
      LossResult loss;
      if (cfg.loss == LossKind::bce) {
        targets.resize(model.output_dim(), static_cast<Eigen::Index>(n));
        for (std::size_t c = 0; c < n; ++c)
          targets.col(static_cast<Eigen::Index>(c)) = train_set.targets.row(static_cast<Eigen::Index>(rows[c])).transpose();
        loss = bce_loss(acts.output(), targets);
      } else {
        classes.resize(n);
        for (std::size_t c = 0; c < n; ++c) classes[c] = train_set.labels[rows[c]];
        loss = softmax_ce_loss(acts.pre.back(), classes);
      }
      if (!std::isfinite(loss.value))
        throw DivergenceError("training diverged: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                              std::to_string(b / cfg.batch_size));
      loss_sum += loss.value * static_cast<double>(n);
      Gradients grads = backward(model, acts, loss.grad);
      if (cfg.l2 > 0.0)
        for (std::size_t l = 0; l < model.layers.size(); ++l) grads.weights[l] += cfg.l2 * model.layers[l].weights;
      adam_step(model, grads, adam);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(order.size());
    stats.val_metric = validation_metric(model, val_set, cfg.loss);
    result.history.push_back(stats);
    if (stats.val_metric > result.best_metric) {
      result.best_metric = stats.val_metric;
      result.best_epoch = epoch;
      result.model = model;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (since_best >= cfg.patience) break;
  }
  return result;
}

inline std::vector<std::uint8_t> encode_model(const MLPModel& model) {
  model.validate();
  ByteWriter w;
  w.magic("DCX1");
  w.u32(static_cast<std::uint32_t>(model.layers.size()));
  w.u32(static_cast<std::uint32_t>(model.input_dim()));
  w.u32(model.context_frames);
  for (const auto& L : model.layers) {
    w.u32(static_cast<std::uint32_t>(L.in_dim()));
    w.u32(static_cast<std::uint32_t>(L.out_dim()));
    w.u8(static_cast<std::uint8_t>(L.activation));
    for (Eigen::Index i = 0; i < L.weights.rows(); ++i)
      for (Eigen::Index j = 0; j < L.weights.cols(); ++j) w.f32(static_cast<float>(L.weights(i, j)));
    for (Eigen::Index i = 0; i < L.bias.size(); ++i) w.f32(static_cast<float>(L.bias[i]));
  }
  return w.bytes();
}

inline MLPModel decode_model(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("DCX1");
  const std::uint32_t n_layers = r.u32();
  const std::uint32_t input_dim = r.u32();
  MLPModel m;
  m.context_frames = r.u32();
  if (n_layers == 0) throw DataError("DCX1: zero layers");
  std::uint32_t prev = input_dim;
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    const std::uint32_t in = r.u32();
    const std::uint32_t out = r.u32();
    const std::uint8_t act = r.u8();
    if (in != prev || in == 0 || out == 0) throw DataError("DCX1: inconsistent layer dimensions at layer " + std::to_string(l));
    if (act > 3) throw DataError("DCX1: unknown activation code");
    if (static_cast<std::uint64_t>(in) * out * 4 > r.remaining()) throw DataError("DCX1: truncated weights");
    DenseLayer L;
    L.activation = static_cast<Activation>(act);
    L.weights.resize(out, in);
    for (std::uint32_t i = 0; i < out; ++i)
      for (std::uint32_t j = 0; j < in; ++j) L.weights(i, j) = r.f32();
    L.bias.resize(out);
    for (std::uint32_t i = 0; i < out; ++i) L.bias[i] = r.f32();
    m.layers.push_back(std::move(L));
    prev = out;
  }
  if (r.remaining() != 0) throw DataError("DCX1: trailing bytes");
  m.validate();
  return m;
}

inline void save_model(const MLPModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, encode_model(model));
}

inline MLPModel load_model(const std::filesystem::path& path) { return decode_model(read_file_bytes(path)); }

/// Rounds every parameter to f32, matching what a DCX1 round trip yields.
inline void round_to_storage_precision(MLPModel& model) {
  for (auto& L : model.layers) {
    L.weights = L.weights.cast<float>().cast<double>();
    L.bias = L.bias.cast<float>().cast<double>();
  }
  ++model.revision;
}

}  // namespace deepchroma

#endif  // DEEPCHROMA_NN_HPP
