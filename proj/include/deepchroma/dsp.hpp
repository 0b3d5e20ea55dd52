#ifndef DEEPCHROMA_DSP_HPP
#define DEEPCHROMA_DSP_HPP

// Audio front end: STFT magnitudes, the triangular quarter-tone filterbank,
// log compression and context stacking into super-frames.

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "deepchroma/binio.hpp"
#include "deepchroma/error.hpp"
#include "deepchroma/wav.hpp"

namespace deepchroma {

inline constexpr int kFrameSize = 8192;
inline constexpr int kHopSize = 4410;
inline constexpr int kBands = 178;
inline constexpr int kContextFrames = 15;
inline constexpr int kSuperFrameDim = kContextFrames * kBands;

struct MagnitudeSpectrogram {
  RowMatrix data;  // n_frames x (frame_size / 2 + 1)
  int frame_size = kFrameSize;
  int hop = kHopSize;
  int sample_rate = kSampleRate;
};

struct FilterbankParams {
  int sample_rate = kSampleRate;
  int frame_size = kFrameSize;
  double fmin = 30.0;
  double fmax = 5500.0;
  int bins_per_octave = 24;

  bool operator==(const FilterbankParams&) const = default;
};

struct QuarterToneFilterbank {
  RowMatrix matrix;                  // bands x STFT bins
  std::vector<double> center_freqs;  // Hz, strictly increasing
};

struct QuarterToneSpectrogram {
  RowMatrix data;  // n_frames x bands
  double fps = 10.0;
  bool is_log = false;

  Eigen::Index frames() const { return data.rows(); }
};

struct SuperFrameSequence {
  RowMatrix data;  // n_frames x (context_frames * bands)
  int context_frames = kContextFrames;
};

namespace detail {

struct FftPlan {
  int size = 0;
  double* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;

  explicit FftPlan(int n) : size(n) {
    in = fftw_alloc_real(static_cast<std::size_t>(n));
    out = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
    plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  ~FftPlan() {
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
};

// FFTW's planner is not thread-safe; execution on distinct buffers is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

inline const FftPlan& fft_plan(int n) {
  static std::map<int, std::unique_ptr<FftPlan>> plans;
  std::lock_guard lock(fftw_planner_mutex());
  auto& slot = plans[n];
  if (!slot) slot = std::make_unique<FftPlan>(n);
  return *slot;
}

}  // namespace detail

/// Symmetric Hann window of length n.
inline std::vector<double> hann_window(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  if (n == 1) {
    w[0] = 1.0;
    return w;
  }
  for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
  return w;
}

/// Frame n is centred on sample n * hop; samples outside the clip are zero.
inline MagnitudeSpectrogram stft_magnitude(const AudioClip& clip, int frame_size = kFrameSize, int hop = kHopSize) {
  if (clip.samples.empty()) throw UsageError("stft_magnitude: empty clip");
  if (frame_size <= 0 || hop <= 0) throw UsageError("stft_magnitude: frame_size and hop must be positive");

  const auto len = static_cast<long long>(clip.samples.size());
  const long long n_frames = (len + hop - 1) / hop;
  const int n_bins = frame_size / 2 + 1;
  const auto window = hann_window(frame_size);
  const auto& plan = detail::fft_plan(frame_size);

  double* in = fftw_alloc_real(static_cast<std::size_t>(frame_size));
  fftw_complex* out = fftw_alloc_complex(static_cast<std::size_t>(n_bins));
  MagnitudeSpectrogram spec;
  spec.frame_size = frame_size;
  spec.hop = hop;
  spec.sample_rate = clip.sample_rate;
  spec.data.resize(n_frames, n_bins);
  for (long long f = 0; f < n_frames; ++f) {
    const long long start = f * hop - frame_size / 2;
    for (int i = 0; i < frame_size; ++i) {
      const long long s = start + i;
      in[i] = (s >= 0 && s < len) ? clip.samples[static_cast<std::size_t>(s)] * window[static_cast<std::size_t>(i)] : 0.0;
    }
    fftw_execute_dft_r2c(plan.plan, in, out);
    for (int k = 0; k < n_bins; ++k) spec.data(f, k) = std::hypot(out[k][0], out[k][1]);
  }
  fftw_free(in);
  fftw_free(out);
  return spec;
}

/// Triangular filters centred on the 440 Hz-anchored quarter-tone grid.
///
/// Each triangle rises from the previous grid centre and falls to the next one,
/// so the outermost grid points in [fmin, fmax] only serve as edges. Half-widths
/// are at least one STFT bin, which keeps low-frequency filters from collapsing
/// onto a single bin and preserves sub-bin centre information. Rows are
/// normalised to unit sum; numerically identical rows are merged.
inline QuarterToneFilterbank build_filterbank(const FilterbankParams& p = {}) {
  if (p.sample_rate <= 0 || p.frame_size <= 0 || p.bins_per_octave <= 0)
    throw UsageError("build_filterbank: non-positive parameter");
  if (!(p.fmin > 0.0 && p.fmin < p.fmax && p.fmax <= p.sample_rate / 2.0))
    throw UsageError("build_filterbank: require 0 < fmin < fmax <= sample_rate / 2");

  const double bpo = p.bins_per_octave;
  std::vector<double> grid;
  const auto k_lo = static_cast<long>(std::floor(bpo * std::log2(p.fmin / 440.0))) - 1;
  const auto k_hi = static_cast<long>(std::ceil(bpo * std::log2(p.fmax / 440.0))) + 1;
  for (long k = k_lo; k <= k_hi; ++k) {
    const double f = 440.0 * std::exp2(static_cast<double>(k) / bpo);
    if (f >= p.fmin && f <= p.fmax) grid.push_back(f);
  }
  if (grid.size() < 3) throw UsageError("build_filterbank: no filters fit between fmin and fmax");

  const int n_bins = p.frame_size / 2 + 1;
  const double bin_hz = static_cast<double>(p.sample_rate) / p.frame_size;
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> centers;
  for (std::size_t j = 1; j + 1 < grid.size(); ++j) {
    const double c = grid[j];
    const double left = std::max(c - grid[j - 1], bin_hz);
    const double right = std::max(grid[j + 1] - c, bin_hz);
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n_bins);
    const int b_lo = std::max(0, static_cast<int>(std::floor((c - left) / bin_hz)));
    const int b_hi = std::min(n_bins - 1, static_cast<int>(std::ceil((c + right) / bin_hz)));
    for (int b = b_lo; b <= b_hi; ++b) {
      const double x = b * bin_hz - c;
      row[b] = std::max(0.0, x < 0.0 ? 1.0 + x / left : 1.0 - x / right);
    }
    const double sum = row.sum();
    if (sum <= 0.0) continue;
    row /= sum;
    if (!rows.empty() && (rows.back() - row).cwiseAbs().maxCoeff() <= 1e-12) continue;
    rows.push_back(std::move(row));
    centers.push_back(c);
  }
  if (rows.empty()) throw UsageError("build_filterbank: no filters fit between fmin and fmax");

  QuarterToneFilterbank fb;
  fb.matrix.resize(static_cast<Eigen::Index>(rows.size()), n_bins);
  for (std::size_t i = 0; i < rows.size(); ++i) fb.matrix.row(static_cast<Eigen::Index>(i)) = rows[i];
  fb.center_freqs = std::move(centers);
  if (p == FilterbankParams{} && fb.matrix.rows() != kBands)
    throw std::logic_error("default quarter-tone filterbank must have 178 bands");
  return fb;
}

inline QuarterToneSpectrogram apply_filterbank(const MagnitudeSpectrogram& spec, const QuarterToneFilterbank& fb) {
  if (fb.matrix.cols() != spec.data.cols())
    throw UsageError("apply_filterbank: filterbank has " + std::to_string(fb.matrix.cols()) +
                     " columns, spectrogram has " + std::to_string(spec.data.cols()) + " bins");
  QuarterToneSpectrogram out;
  out.data.noalias() = spec.data * fb.matrix.transpose();
  out.fps = static_cast<double>(spec.sample_rate) / spec.hop;
  out.is_log = false;
  return out;
}

inline QuarterToneSpectrogram log_compress(const QuarterToneSpectrogram& s) {
  if (s.is_log) throw UsageError("log_compress: spectrogram is already log-compressed");
  if ((s.data.array() < 0.0).any()) throw UsageError("log_compress: negative magnitude");
  QuarterToneSpectrogram out;
  out.data = s.data.array().log1p().matrix();
  out.fps = s.fps;
  out.is_log = true;
  return out;
}

/// Row t of the result is rows t-per_side .. t+per_side of `frames`
/// concatenated in time order, zero outside the sequence.
inline RowMatrix stack_frames(const RowMatrix& frames, int per_side) {
  if (per_side < 0) throw UsageError("stack_frames: negative context");
  const Eigen::Index n = frames.rows();
  const Eigen::Index d = frames.cols();
  const Eigen::Index width = 2 * per_side + 1;
  RowMatrix out = RowMatrix::Zero(n, width * d);
  for (Eigen::Index t = 0; t < n; ++t)
    for (Eigen::Index k = 0; k < width; ++k) {
      const Eigen::Index src = t + k - per_side;
      if (src >= 0 && src < n) out.block(t, k * d, 1, d) = frames.row(src);
    }
  return out;
}

inline SuperFrameSequence stack_context(const QuarterToneSpectrogram& s_log, int frames_per_side = kContextFrames / 2) {
  if (!s_log.is_log) throw UsageError("stack_context: expects a log-compressed spectrogram");
  return {stack_frames(s_log.data, frames_per_side), 2 * frames_per_side + 1};
}

/// Full front end: audio -> linear quarter-tone spectrogram S.
inline QuarterToneSpectrogram quarter_tone_spectrogram(const AudioClip& clip) {
  static const QuarterToneFilterbank fb = build_filterbank();
  if (clip.sample_rate != kSampleRate) throw UsageError("quarter_tone_spectrogram: expects 44100 Hz audio");
  return apply_filterbank(stft_magnitude(clip), fb);
}

}  // namespace deepchroma

#endif  // DEEPCHROMA_DSP_HPP
