#ifndef DEEPCHROMA_WAV_HPP
#define DEEPCHROMA_WAV_HPP

// PCM WAV reading/writing and band-limited resampling.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "deepchroma/binio.hpp"
#include "deepchroma/error.hpp"

namespace deepchroma {

inline constexpr int kSampleRate = 44100;

struct AudioClip {
  std::vector<double> samples;
  int sample_rate = kSampleRate;

  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

/// Windowed-sinc (Blackman window, 32 zero crossings) sample-rate conversion.
inline std::vector<double> resample(std::span<const double> in, int from_rate, int to_rate) {
  if (from_rate <= 0 || to_rate <= 0) throw UsageError("resample: sample rates must be positive");
  if (from_rate == to_rate) return {in.begin(), in.end()};
  const double ratio = static_cast<double>(to_rate) / from_rate;
  const double cutoff = std::min(1.0, ratio);
  constexpr int kZeroCrossings = 32;
  const double half_width = kZeroCrossings / cutoff;  // in input samples
  const auto out_len = static_cast<std::size_t>(std::llround(static_cast<double>(in.size()) * ratio));
  std::vector<double> out(out_len, 0.0);
  const auto n_in = static_cast<long long>(in.size());
  for (std::size_t n = 0; n < out_len; ++n) {
    const double t = static_cast<double>(n) / ratio;
    const long long lo = std::max<long long>(0, static_cast<long long>(std::ceil(t - half_width)));
    const long long hi = std::min<long long>(n_in - 1, static_cast<long long>(std::floor(t + half_width)));
    double acc = 0.0;
    for (long long k = lo; k <= hi; ++k) {
      const double d = t - static_cast<double>(k);
      const double x = cutoff * d;
      const double sinc = x == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
      const double u = (d + half_width) / (2.0 * half_width);  // 0..1 across the window
      const double w = 0.42 - 0.5 * std::cos(2.0 * std::numbers::pi * u) + 0.08 * std::cos(4.0 * std::numbers::pi * u);
      acc += in[static_cast<std::size_t>(k)] * cutoff * sinc * w;
    }
    out[n] = acc;
  }
  return out;
}

namespace detail {

inline std::uint16_t le16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }
inline std::uint32_t le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline double decode_sample(const std::uint8_t* p, int bits, bool is_float) {
  if (is_float) {
    float f;
    std::memcpy(&f, p, 4);
    return f;
  }
  switch (bits) {
    case 8:
      return (static_cast<int>(p[0]) - 128) / 128.0;
    case 16:
      return static_cast<std::int16_t>(le16(p)) / 32768.0;
    case 24: {
      std::int32_t v = static_cast<std::int32_t>(p[0] | (p[1] << 8) | (p[2] << 16));
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    default:
      return static_cast<std::int32_t>(le32(p)) / 2147483648.0;
  }
}

}  // namespace detail

/// Decodes a PCM WAV (8/16/24/32-bit int or 32-bit float, 1-2 channels) to a
/// mono clip at 44.1 kHz.
inline AudioClip decode_wav(std::span<const std::uint8_t> bytes) {
  using detail::le16;
  using detail::le32;
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw DataError("not a RIFF/WAVE file");

  int format = 0, channels = 0, rate = 0, bits = 0;
  const std::uint8_t* payload = nullptr;
  std::size_t payload_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || avail < 16) throw DataError("truncated fmt chunk");
      format = le16(chunk + 8);
      channels = le16(chunk + 10);
      rate = static_cast<int>(le32(chunk + 12));
      bits = le16(chunk + 22);
      if (format == 0xFFFE) {
        if (size < 40 || avail < 40) throw DataError("truncated extensible fmt chunk");
        format = le16(chunk + 8 + 24);  // first two bytes of the sub-format GUID
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      payload = chunk + 8;
      payload_size = std::min<std::size_t>(size, avail);
    }
    pos = body + size + (size & 1u);
  }
  if (format == 0) throw DataError("missing fmt chunk");
  if (payload == nullptr) throw DataError("missing data chunk");
  const bool is_float = format == 3;
  if (!(format == 1 || is_float)) throw DataError("unsupported WAV encoding " + std::to_string(format));
  if (is_float ? bits != 32 : !(bits == 8 || bits == 16 || bits == 24 || bits == 32))
    throw DataError("unsupported bit depth " + std::to_string(bits));
  if (channels < 1 || channels > 2) throw DataError("unsupported channel count " + std::to_string(channels));
  if (rate <= 0) throw DataError("invalid sample rate");

  const std::size_t frame_bytes = static_cast<std::size_t>(bits / 8) * static_cast<std::size_t>(channels);
  const std::size_t n = payload_size / frame_bytes;
  if (n == 0) throw DataError("zero-length audio");

  std::vector<double> mono(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c)
      acc += detail::decode_sample(payload + i * frame_bytes + static_cast<std::size_t>(c * bits / 8), bits, is_float);
    mono[i] = acc / channels;
  }
  AudioClip clip;
  clip.samples = rate == kSampleRate ? std::move(mono) : resample(mono, rate, kSampleRate);
  clip.sample_rate = kSampleRate;
  for (double s : clip.samples)
    if (!std::isfinite(s)) throw DataError("non-finite sample value");
  return clip;
}

inline AudioClip load_audio(const std::filesystem::path& path) {
  return decode_wav(read_file_bytes(path));
}

/// Interleaved channels in, 16-bit PCM bytes out (values clipped to [-1, 1]).
inline std::vector<std::uint8_t> encode_wav16(std::span<const double> interleaved, int sample_rate, int channels = 1) {
  ByteWriter w;
  const auto data_bytes = static_cast<std::uint32_t>(interleaved.size() * 2);
  w.magic("RIFF");
  w.u32(36 + data_bytes);
  w.magic("WAVE");
  w.magic("fmt ");
  w.u32(16);
  const std::uint16_t fmt[2] = {1, static_cast<std::uint16_t>(channels)};
  w.raw(fmt, 4);
  w.u32(static_cast<std::uint32_t>(sample_rate));
  w.u32(static_cast<std::uint32_t>(sample_rate * channels * 2));
  const std::uint16_t align[2] = {static_cast<std::uint16_t>(channels * 2), 16};
  w.raw(align, 4);
  w.magic("data");
  w.u32(data_bytes);
  for (double s : interleaved) {
    const double c = std::clamp(s, -1.0, 1.0);
    const auto v = static_cast<std::int16_t>(std::lround(c * 32767.0));
    w.raw(&v, 2);
  }
  return w.bytes();
}

inline void save_wav16(const std::filesystem::path& path, std::span<const double> mono, int sample_rate = kSampleRate) {
  write_file_atomic(path, encode_wav16(mono, sample_rate, 1));
}

}  // namespace deepchroma

#endif  // DEEPCHROMA_WAV_HPP
