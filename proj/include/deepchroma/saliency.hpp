#ifndef DEEPCHROMA_SALIENCY_HPP
#define DEEPCHROMA_SALIENCY_HPP

// Guided back-propagation saliency maps for a trained extractor and their
// time / frequency aggregations.

#include <optional>
#include <vector>

#include "deepchroma/annotations.hpp"
#include "deepchroma/nn.hpp"

namespace deepchroma {

struct SaliencyMap {
  RowMatrix data;  // context_frames x bands
};

struct AggregatedSaliency {
  enum class Axis : std::uint8_t { time, frequency };
  Axis axis = Axis::frequency;  // the axis the profile runs along
  Eigen::VectorXd values;
  std::optional<Eigen::VectorXd> positive;
  std::optional<Eigen::VectorXd> negative;
};

/// Output units to seed: an empty list means all units.
struct UnitSelector {
  std::vector<int> units;

  static UnitSelector all() { return {}; }
  static UnitSelector from_template(const TargetChroma& t) {
    UnitSelector s;
    for (int i = 0; i < 12; ++i)
      if (t[static_cast<std::size_t>(i)]) s.units.push_back(i);
    return s;
  }
};

inline Eigen::VectorXd seed_vector(const MLPModel& model, const UnitSelector& sel) {
  if (sel.units.empty()) return Eigen::VectorXd::Ones(model.output_dim());
  Eigen::VectorXd seed = Eigen::VectorXd::Zero(model.output_dim());
  for (int u : sel.units) {
    if (u < 0 || u >= model.output_dim()) throw UsageError("saliency: selector unit " + std::to_string(u) + " out of range");
    seed[u] = 1.0;
  }
  return seed;
}

/// Input-space guided gradients for a batch (columns of x), seeded at the
/// output-layer logits. At every relu the gradient passes only where the
/// forward input was positive and the incoming gradient is positive.
inline Matrix guided_backprop_batch(const MLPModel& model, const Matrix& x, const Matrix& seeds) {
  for (std::size_t l = 0; l + 1 < model.layers.size(); ++l)
    if (model.layers[l].activation != Activation::relu && model.layers[l].activation != Activation::identity)
      throw UsageError("guided_backprop: hidden layers must be relu or identity");
  if (seeds.rows() != model.output_dim() || seeds.cols() != x.cols()) throw UsageError("guided_backprop: seed shape mismatch");
  const Activations acts = forward(model, x, Mode::infer);
  Matrix grad = seeds;
  for (std::size_t l = model.layers.size(); l-- > 0;) {
    grad = model.layers[l].weights.transpose() * grad;
    if (l == 0) break;
    if (model.layers[l - 1].activation == Activation::relu)
      grad.array() *= ((acts.pre[l - 1].array() > 0.0) && (grad.array() > 0.0)).cast<double>();
  }
  return grad;
}

inline SaliencyMap reshape_saliency(const Eigen::VectorXd& flat, int context_frames) {
  if (context_frames < 1 || flat.size() % context_frames != 0) throw UsageError("saliency: input dim not divisible by context");
  const Eigen::Index bands = flat.size() / context_frames;
  SaliencyMap m;
  m.data = Eigen::Map<const RowMatrix>(flat.data(), context_frames, bands);
  return m;
}

inline SaliencyMap guided_backprop(const MLPModel& model, const Eigen::VectorXd& superframe,
                                   const UnitSelector& selector = UnitSelector::all()) {
  const Matrix g = guided_backprop_batch(model, superframe, seed_vector(model, selector));
  return reshape_saliency(g.col(0), static_cast<int>(model.context_frames));
}

/// Column sums over the context axis: one value per frequency band.
inline AggregatedSaliency sum_over_time(const SaliencyMap& map) {
  AggregatedSaliency a;
  a.axis = AggregatedSaliency::Axis::frequency;
  a.values = map.data.colwise().sum().transpose();
  return a;
}

/// Per context frame, the sum of positive entries and the sum of negative entries.
inline AggregatedSaliency sum_over_freq_signed(const SaliencyMap& map) {
  AggregatedSaliency a;
  a.axis = AggregatedSaliency::Axis::time;
  a.positive = map.data.cwiseMax(0.0).rowwise().sum();
  a.negative = map.data.cwiseMin(0.0).rowwise().sum();
  a.values = *a.positive + *a.negative;
  return a;
}

/// Mean map over the selected super-frames. `selectors` is either empty (all
/// units for every sample) or holds one selector per sample.
inline SaliencyMap average_maps(const MLPModel& model, const WindowedFrames& inputs, std::span<const std::size_t> samples,
                                std::span<const UnitSelector> selectors = {}, std::size_t batch = 256) {
  if (samples.empty()) throw UsageError("average_maps: no super-frames");
  if (!selectors.empty() && selectors.size() != samples.size()) throw UsageError("average_maps: one selector per sample");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(model.input_dim());
  Matrix x, seeds;
  for (std::size_t b = 0; b < samples.size(); b += batch) {
    const std::size_t n = std::min(batch, samples.size() - b);
    inputs.gather(samples.subspan(b, n), x);
    seeds.resize(model.output_dim(), static_cast<Eigen::Index>(n));
    for (std::size_t c = 0; c < n; ++c)
      seeds.col(static_cast<Eigen::Index>(c)) = seed_vector(model, selectors.empty() ? UnitSelector::all() : selectors[b + c]);
    const Matrix g = guided_backprop_batch(model, x, seeds);
    for (Eigen::Index c = 0; c < g.cols(); ++c) sum += g.col(c);
  }
  sum /= static_cast<double>(samples.size());
  return reshape_saliency(sum, static_cast<int>(model.context_frames));
}

}  // namespace deepchroma

#endif  // DEEPCHROMA_SALIENCY_HPP
