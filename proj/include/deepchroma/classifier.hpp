#ifndef DEEPCHROMA_CLASSIFIER_HPP
#define DEEPCHROMA_CLASSIFIER_HPP

// Frame-wise multinomial logistic regression: a zero-hidden-layer softmax MLP.

#include <numeric>
#include <vector>

#include "deepchroma/annotations.hpp"
#include "deepchroma/nn.hpp"

namespace deepchroma {

struct LabeledSequence {
  RowMatrix features;  // n_frames x base_dim (unstacked)
  std::vector<ChordClass> labels;
};

inline TrainConfig default_classifier_config() {
  TrainConfig cfg;
  cfg.loss = LossKind::softmax_ce;
  cfg.dropout_p = 0.0;
  cfg.l2 = 1e-4;
  cfg.max_epochs = 1000;
  cfg.adam.alpha = 1e-2;
  return cfg;
}

/// Builds a softmax training set; excluded frames are not selectable.
inline TrainingSet classifier_set(std::span<const LabeledSequence> seqs, int context_frames) {
  TrainingSet set{WindowedFrames(context_frames / 2), {}, {}, {}};
  for (const auto& s : seqs) {
    if (static_cast<Eigen::Index>(s.labels.size()) != s.features.rows())
      throw UsageError("classifier_set: label count does not match frame count");
    set.inputs.add(s.features);
    for (ChordClass c : s.labels) set.labels.push_back(c.is_excluded() ? -1 : c.index);
  }
  set.select_all();
  return set;
}

/// Trains logistic regression over `context_frames` stacked frames. Inputs are
/// standardised during training and the map is folded into the weights.
inline MLPModel train_logreg(std::span<const LabeledSequence> train_seqs, std::span<const LabeledSequence> val_seqs,
                             int context_frames, const TrainConfig& cfg, int n_classes = ChordClass::kCount) {
  if (context_frames < 1 || context_frames % 2 == 0) throw UsageError("train_logreg: context must be a positive odd count");
  TrainingSet train_set = classifier_set(train_seqs, context_frames);
  TrainingSet val_set = classifier_set(val_seqs, context_frames);
  const InputAffine norm = fit_standardizer(train_set.inputs);
  train_set.inputs.set_affine(norm);
  val_set.inputs.set_affine(norm);
  if (train_set.index.empty()) throw UsageError("train_logreg: empty training set");
  const int dim = static_cast<int>(train_set.inputs.dim());
  const int sizes[] = {dim, n_classes};
  MLPModel model = make_mlp(sizes, Activation::identity, Activation::softmax, cfg.seed,
                            static_cast<std::uint32_t>(context_frames));
  TrainConfig c = cfg;
  c.loss = LossKind::softmax_ce;
  MLPModel trained = train(std::move(model), train_set, val_set.index.empty() ? train_set : val_set, c).model;
  fold_input_affine(trained, norm, context_frames);
  return trained;
}

struct FramePrediction {
  std::vector<ChordClass> classes;
  RowMatrix probabilities;  // n_frames x n_classes
};

/// Argmax of softmax(W x + b) per frame; ties go to the lowest class index.
inline FramePrediction predict_frames(const MLPModel& model, const RowMatrix& features, std::size_t batch = 2048) {
  if (model.layers.empty() || model.layers.back().activation != Activation::softmax)
    throw DataError("predict_frames: expects a softmax classifier");
  const int ctx = static_cast<int>(model.context_frames);
  if (model.input_dim() != ctx * features.cols())
    throw DataError("predict_frames: classifier expects dim " + std::to_string(model.input_dim()) + ", features give " +
                    std::to_string(ctx * features.cols()));
  WindowedFrames windows(ctx / 2);
  windows.add(features);
  FramePrediction out;
  out.probabilities.resize(features.rows(), model.output_dim());
  std::vector<std::size_t> rows;
  Matrix x;
  for (std::size_t b = 0; b < windows.size(); b += batch) {
    const std::size_t n = std::min(batch, windows.size() - b);
    rows.resize(n);
    std::iota(rows.begin(), rows.end(), b);
    windows.gather(rows, x);
    out.probabilities.middleRows(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(n)) = predict(model, x).transpose();
  }
  out.classes.resize(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index t = 0; t < out.probabilities.rows(); ++t) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < out.probabilities.cols(); ++k)
      if (out.probabilities(t, k) > out.probabilities(t, best)) best = k;
    out.classes[static_cast<std::size_t>(t)] = ChordClass{static_cast<std::uint8_t>(best)};
  }
  return out;
}

}  // namespace deepchroma

#endif  // DEEPCHROMA_CLASSIFIER_HPP
