#ifndef DEEPCHROMA_FEATURES_HPP
#define DEEPCHROMA_FEATURES_HPP

// The compared feature types: deep chroma, folded chroma baselines, raw
// log spectrogram and ideal chroma, plus classifier-side context stacking.

#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deepchroma/annotations.hpp"
#include "deepchroma/dsp.hpp"
#include "deepchroma/nn.hpp"

namespace deepchroma {

enum class FeatureKind : std::uint8_t { deep, c, cwlog, slog, ideal };

inline std::string_view feature_name(FeatureKind k) {
  switch (k) {
    case FeatureKind::deep: return "deep";
    case FeatureKind::c: return "c";
    case FeatureKind::cwlog: return "cwlog";
    case FeatureKind::slog: return "slog";
    case FeatureKind::ideal: return "ideal";
  }
  return "?";
}

inline FeatureKind parse_feature(std::string_view s) {
  for (auto k : {FeatureKind::deep, FeatureKind::c, FeatureKind::cwlog, FeatureKind::slog, FeatureKind::ideal})
    if (feature_name(k) == s) return k;
  throw UsageError("unknown feature kind '" + std::string(s) + "' (expected deep|c|cwlog|slog|ideal)");
}

struct Chromagram {
  enum class Kind : std::uint8_t { deep, folded, ideal };
  RowMatrix data;  // n_frames x 12, column 0 = C
  double fps = 10.0;
  Kind kind = Kind::folded;
};

struct FeatureMatrix {
  RowMatrix data;
  double context_seconds = 0.1;
};

/// Odd frame count nearest to `seconds * fps` (ties round up), at least 1.
inline int context_frames_for(double seconds, double fps = 10.0) {
  const double x = seconds * fps;
  const long half = std::lround((x - 1.0) / 2.0);
  return half < 0 ? 1 : static_cast<int>(2 * half + 1);
}

inline const std::vector<double>& default_band_centers() {
  static const std::vector<double> centers = build_filterbank().center_freqs;
  return centers;
}

/// Pitch class (0 = C) of the semitone nearest to `hz`; quarter-tone ties go up.
inline int pitch_class_of(double hz) {
  const double midi = 69.0 + 12.0 * std::log2(hz / 440.0);
  const long nearest = static_cast<long>(std::floor(midi + 0.5));
  return static_cast<int>(((nearest % 12) + 12) % 12);
}

namespace detail {

inline RowMatrix fold_and_normalize(const RowMatrix& bands, std::span<const double> centers) {
  if (static_cast<std::size_t>(bands.cols()) != centers.size())
    throw UsageError("fold: band count does not match centre frequencies");
  RowMatrix fold_matrix = RowMatrix::Zero(bands.cols(), 12);
  for (std::size_t b = 0; b < centers.size(); ++b) fold_matrix(static_cast<Eigen::Index>(b), pitch_class_of(centers[b])) = 1.0;
  RowMatrix out = bands * fold_matrix;
  for (Eigen::Index t = 0; t < out.rows(); ++t) {
    const double mx = out.row(t).maxCoeff();
    if (mx > 0.0) out.row(t) /= mx;
  }
  return out;
}

}  // namespace detail

/// Baseline C: each band's energy added to its nearest semitone's pitch class,
/// then every frame max-normalised.
inline Chromagram fold_chroma(const QuarterToneSpectrogram& s, std::span<const double> centers = default_band_centers()) {
  if (s.is_log) throw UsageError("fold_chroma: expects a linear spectrogram");
  return {detail::fold_and_normalize(s.data, centers), s.fps, Chromagram::Kind::folded};
}

inline double log_gaussian_weight(double hz, double center_hz, double sigma_octaves) {
  const double z = std::log2(hz / center_hz) / sigma_octaves;
  return std::exp(-0.5 * z * z);
}

/// Baseline C^W_Log: Gaussian weighting in log-frequency, log(1 + x), fold, normalise.
inline Chromagram fold_chroma_weighted_log(const QuarterToneSpectrogram& s, double center_hz = 220.0,
                                           double sigma_octaves = 1.0,
                                           std::span<const double> centers = default_band_centers()) {
  if (s.is_log) throw UsageError("fold_chroma_weighted_log: expects a linear spectrogram");
  if (!(center_hz > 0.0 && sigma_octaves > 0.0)) throw UsageError("fold_chroma_weighted_log: bad weighting parameters");
  if (static_cast<std::size_t>(s.data.cols()) != centers.size())
    throw UsageError("fold_chroma_weighted_log: band count does not match centre frequencies");
  Eigen::RowVectorXd w(static_cast<Eigen::Index>(centers.size()));
  for (std::size_t b = 0; b < centers.size(); ++b) w[static_cast<Eigen::Index>(b)] = log_gaussian_weight(centers[b], center_hz, sigma_octaves);
  const RowMatrix weighted = (s.data.array().rowwise() * w.array()).log1p().matrix();
  return {detail::fold_and_normalize(weighted, centers), s.fps, Chromagram::Kind::folded};
}

inline Chromagram ideal_chroma(const ChordAnnotation& ann, std::size_t n_frames, double fps = 10.0) {
  return {targets_matrix(frame_targets(ann, n_frames, fps)), fps, Chromagram::Kind::ideal};
}

/// Sigmoid outputs of the extractor for every frame's super-frame.
inline Chromagram deep_chroma(const MLPModel& model, const QuarterToneSpectrogram& s_log, std::size_t batch = 1024) {
  if (!s_log.is_log) throw UsageError("deep_chroma: expects a log-compressed spectrogram");
  if (model.context_frames % 2 == 0) throw DataError("deep_chroma: model context must be odd");
  if (model.input_dim() != static_cast<Eigen::Index>(model.context_frames) * s_log.data.cols())
    throw DataError("deep_chroma: model expects input dim " + std::to_string(model.input_dim()) + ", features give " +
                    std::to_string(model.context_frames * s_log.data.cols()));
  WindowedFrames windows(static_cast<int>(model.context_frames / 2));
  windows.add(s_log.data);
  Chromagram out;
  out.kind = Chromagram::Kind::deep;
  out.fps = s_log.fps;
  out.data.resize(static_cast<Eigen::Index>(windows.size()), model.output_dim());
  std::vector<std::size_t> rows;
  Matrix x;
  for (std::size_t b = 0; b < windows.size(); b += batch) {
    const std::size_t n = std::min(batch, windows.size() - b);
    rows.resize(n);
    std::iota(rows.begin(), rows.end(), b);
    windows.gather(rows, x);
    out.data.middleRows(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(n)) = predict(model, x).transpose();
  }
  return out;
}

/// Concatenates each frame with its neighbours (zero padding) for the linear
/// classifier.
inline FeatureMatrix stack_for_classifier(const RowMatrix& frames, double context_seconds, double fps = 10.0) {
  const int n = context_frames_for(context_seconds, fps);
  return {stack_frames(frames, n / 2), n / fps};
}

/// Deep chroma already carries its context, so the classifier sees one frame.
inline FeatureMatrix stack_for_classifier(const Chromagram& c, double context_seconds) {
  if (c.kind == Chromagram::Kind::deep) return {c.data, 1.0 / c.fps};
  return stack_for_classifier(c.data, context_seconds, c.fps);
}

}  // namespace deepchroma

#endif  // DEEPCHROMA_FEATURES_HPP
