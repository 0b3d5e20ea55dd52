#ifndef DEEPCHROMA_RENDER_HPP
#define DEEPCHROMA_RENDER_HPP

// Raster output: binary PGM for chromagrams / spectrograms, binary PPM with a
// diverging red-white-blue map for saliency.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "deepchroma/binio.hpp"

namespace deepchroma {

struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;  // row-major, top row first

  std::uint8_t at(int x, int y, int c = 0) const {
    return pixels[static_cast<std::size_t>((y * width + x) * channels + c)];
  }
};

/// One column per frame, one row per feature with the highest index on top.
/// The smallest value maps to white, the largest to black; a constant input is all white.
inline Image render_grayscale(const RowMatrix& frames) {
  Image img{static_cast<int>(frames.rows()), static_cast<int>(frames.cols()), 1, {}};
  img.pixels.assign(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height), 255);
  if (frames.size() == 0) return img;
  const double lo = frames.minCoeff();
  const double hi = frames.maxCoeff();
  if (!(hi > lo)) return img;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const double v = (frames(x, img.height - 1 - y) - lo) / (hi - lo);
      img.pixels[static_cast<std::size_t>(y * img.width + x)] = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - v)));
    }
  return img;
}

/// Saliency map (context_frames x bands) as width = frames, height = bands,
/// highest band on top. Positive is red, negative blue, zero white, scaled
/// symmetrically by the largest magnitude.
inline Image render_saliency(const RowMatrix& map) {
  Image img{static_cast<int>(map.rows()), static_cast<int>(map.cols()), 3, {}};
  img.pixels.assign(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height) * 3, 255);
  const double scale = map.size() == 0 ? 0.0 : map.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) return img;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const double a = map(x, img.height - 1 - y) / scale;
      const auto fade = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - std::abs(a))));
      std::uint8_t* px = &img.pixels[static_cast<std::size_t>((y * img.width + x) * 3)];
      if (a > 0.0) {
        px[1] = px[2] = fade;
      } else if (a < 0.0) {
        px[0] = px[1] = fade;
      }
    }
  return img;
}

inline std::vector<std::uint8_t> encode_netpbm(const Image& img) {
  const std::string header =
      std::string(img.channels == 3 ? "P6" : "P5") + '\n' + std::to_string(img.width) + ' ' + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

}  // namespace deepchroma

#endif  // DEEPCHROMA_RENDER_HPP
