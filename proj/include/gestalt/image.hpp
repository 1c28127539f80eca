#pragma once

#include <cctype>
#include <cstdint>
#include <string>
#include <vector>

#include "gestalt/errors.hpp"
#include "gestalt/io_util.hpp"

namespace gestalt {

/// Grayscale image, doubles in [0, 1], row-major, y down.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(int w, int h, double fill = 0.0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }
};

/// RGB image for renders, 8-bit channels.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // 3 bytes per pixel, row-major

  RgbImage() = default;
  RgbImage(int w, int h)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 0) {}

  std::uint8_t* at(int x, int y) {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
};

namespace detail {

inline int parse_pnm_int(const std::string& s, std::size_t& pos) {
  // skip whitespace and '#' comments
  while (pos < s.size()) {
    if (std::isspace(static_cast<unsigned char>(s[pos]))) {
      ++pos;
    } else if (s[pos] == '#') {
      while (pos < s.size() && s[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
  int value = 0;
  bool any = false;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
    value = value * 10 + (s[pos] - '0');
    any = true;
    ++pos;
  }
  if (!any) throw IoError("malformed PNM header");
  return value;
}

}  // namespace detail

/// Binary 8-bit PGM (P5).
inline std::string encode_pgm(const Image& img) {
  std::string out = "P5\n" + std::to_string(img.width) + " " +
                    std::to_string(img.height) + "\n255\n";
  out.reserve(out.size() + img.pixels.size());
  for (double v : img.pixels) {
    const double c = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    out.push_back(static_cast<char>(static_cast<int>(c * 255.0 + 0.5)));
  }
  return out;
}

inline void write_pgm(const Image& img, const std::filesystem::path& path) {
  atomic_write_file(path, encode_pgm(img));
}

inline Image decode_pgm(const std::string& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
    throw IoError("not a binary PGM (P5) file");
  std::size_t pos = 2;
  const int w = detail::parse_pnm_int(bytes, pos);
  const int h = detail::parse_pnm_int(bytes, pos);
  const int maxval = detail::parse_pnm_int(bytes, pos);
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
    throw IoError("unsupported PGM geometry or depth");
  ++pos;  // single whitespace after maxval
  const std::size_t need = static_cast<std::size_t>(w) * h;
  if (bytes.size() < pos + need) throw IoError("truncated PGM payload");
  Image img(w, h);
  for (std::size_t i = 0; i < need; ++i)
    img.pixels[i] =
        static_cast<double>(static_cast<unsigned char>(bytes[pos + i])) / maxval;
  return img;
}

inline Image read_pgm(const std::filesystem::path& path) {
  return decode_pgm(read_file_bytes(path));
}

/// Binary PPM (P6).
inline std::string encode_ppm(const RgbImage& img) {
  std::string out = "P6\n" + std::to_string(img.width) + " " +
                    std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.pixels.data()),
             img.pixels.size());
  return out;
}

inline void write_ppm(const RgbImage& img, const std::filesystem::path& path) {
  atomic_write_file(path, encode_ppm(img));
}

}  // namespace gestalt
