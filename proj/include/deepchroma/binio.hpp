#ifndef DEEPCHROMA_BINIO_HPP
#define DEEPCHROMA_BINIO_HPP

// Little-endian binary helpers and the DCF1 / DCL1 container formats.

#include <Eigen/Dense>

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "deepchroma/error.hpp"

namespace deepchroma {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

class ByteWriter {
 public:
  void magic(std::string_view m) { bytes_.insert(bytes_.end(), m.begin(), m.end()); }
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void f32(float v) { raw(&v, sizeof v); }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  void expect_magic(std::string_view m) {
    need(m.size(), "magic");
    if (std::memcmp(data_.data() + pos_, m.data(), m.size()) != 0)
      throw DataError("bad magic: expected " + std::string(m));
    pos_ += m.size();
  }
  std::uint8_t u8() {
    need(1, "u8");
    return data_[pos_++];
  }
  std::uint32_t u32() { return pod<std::uint32_t>("u32"); }
  float f32() { return pod<float>("f32"); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  template <typename T>
  T pod(const char* what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void need(std::size_t n, const char* what) const {
    if (pos_ + n > data_.size()) throw DataError(std::string("truncated file reading ") + what);
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Writes via a sibling temporary file and renames, so a failed write never
/// leaves a partial output behind.
inline void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed for " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw DataError("cannot rename into " + path.string());
  }
}

inline void write_text_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

/// Contents of a DCF1 feature file: n_frames x dim, row-major f32 on disk.
struct FeatureFile {
  RowMatrix data;
  float fps = 10.0f;
};

inline std::vector<std::uint8_t> encode_dcf(const RowMatrix& data, float fps) {
  ByteWriter w;
  w.magic("DCF1");
  w.u32(static_cast<std::uint32_t>(data.rows()));
  w.u32(static_cast<std::uint32_t>(data.cols()));
  w.f32(fps);
  for (Eigen::Index r = 0; r < data.rows(); ++r)
    for (Eigen::Index c = 0; c < data.cols(); ++c) w.f32(static_cast<float>(data(r, c)));
  return w.bytes();
}

inline FeatureFile decode_dcf(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("DCF1");
  const std::uint32_t n = r.u32();
  const std::uint32_t dim = r.u32();
  FeatureFile f;
  f.fps = r.f32();
  if (static_cast<std::uint64_t>(n) * dim * 4 != r.remaining())
    throw DataError("DCF1 payload size does not match header");
  f.data.resize(n, dim);
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < dim; ++j) f.data(i, j) = r.f32();
  return f;
}

inline void save_dcf(const std::filesystem::path& path, const RowMatrix& data, float fps) {
  write_file_atomic(path, encode_dcf(data, fps));
}

inline FeatureFile load_dcf(const std::filesystem::path& path) {
  return decode_dcf(read_file_bytes(path));
}

inline std::vector<std::uint8_t> encode_dcl(std::span<const std::uint8_t> labels) {
  ByteWriter w;
  w.magic("DCL1");
  w.u32(static_cast<std::uint32_t>(labels.size()));
  w.raw(labels.data(), labels.size());
  return w.bytes();
}

inline std::vector<std::uint8_t> decode_dcl(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("DCL1");
  const std::uint32_t n = r.u32();
  if (r.remaining() != n) throw DataError("DCL1 payload size does not match header");
  std::vector<std::uint8_t> out(n);
  for (auto& v : out) {
    v = r.u8();
    if (v > 24 && v != 255) throw DataError("DCL1 label out of range");
  }
  return out;
}

}  // namespace deepchroma

#endif  // DEEPCHROMA_BINIO_HPP
