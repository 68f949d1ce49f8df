// Copyright 2026 The nerfsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NERFSIM_IMAGE_HPP
#define NERFSIM_IMAGE_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nerfsim/errors.hpp"
#include "nerfsim/geometry.hpp"

namespace nerfsim {

/// Row-major image, pixel (u, v) at index v * width + u.
template <typename Pixel>
class Image {
 public:
  Image() = default;
  Image(int width, int height, const Pixel& fill = Pixel{})
      : width_{width}, height_{height}, pixels_(static_cast<std::size_t>(width) * height, fill) {
    if (width < 1 || height < 1) {
      throw std::invalid_argument("Image: dimensions must be >= 1");
    }
  }

  [[nodiscard]] int width() const { return width_; }
  [[nodiscard]] int height() const { return height_; }
  [[nodiscard]] std::size_t size() const { return pixels_.size(); }

  Pixel& at(int u, int v) { return pixels_[index(u, v)]; }
  const Pixel& at(int u, int v) const { return pixels_[index(u, v)]; }

  Pixel& operator[](std::size_t i) { return pixels_[i]; }
  const Pixel& operator[](std::size_t i) const { return pixels_[i]; }

  [[nodiscard]] const std::vector<Pixel>& pixels() const { return pixels_; }

  bool operator==(const Image&) const = default;

 private:
  [[nodiscard]] std::size_t index(int u, int v) const {
    if (u < 0 || v < 0 || u >= width_ || v >= height_) {
      throw std::out_of_range("Image: pixel out of range");
    }
    return static_cast<std::size_t>(v) * width_ + u;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<Pixel> pixels_;
};

/// Linear RGB in [0, 1] per channel.
using RgbImage = Image<Vec3>;
/// Meters along the ray; 0 marks an invalid pixel.
using DepthImage = Image<double>;

struct LidarPoint {
  Vec3 position;
  int beam = 0;
  int azimuth = 0;
  double range = 0.0;
};

struct PointCloud {
  std::vector<LidarPoint> points;
};

inline std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
}

/// Binary PPM (P6, maxval 255).
inline void write_ppm(std::ostream& out, const RgbImage& image) {
  out << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
  std::vector<char> bytes;
  bytes.reserve(image.size() * 3);
  for (const auto& px : image.pixels()) {
    for (int c = 0; c < 3; ++c) {
      bytes.push_back(static_cast<char>(to_byte(px[c])));
    }
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

namespace detail {

inline std::string next_token(std::istream& in) {
  std::string token;
  char c = 0;
  while (in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!token.empty()) {
        return token;
      }
      continue;
    }
    token.push_back(c);
  }
  return token;
}

inline int parse_positive(const std::string& token, const char* what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(token, &used);
    if (used == token.size() && v > 0) {
      return v;
    }
  } catch (const std::exception&) {
  }
  throw ConfigError(std::string("bad ") + what + " '" + token + "'");
}

inline void write_f32_le(std::ostream& out, float value) {
  const auto bits = std::bit_cast<std::uint32_t>(value);
  const char b[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                     static_cast<char>((bits >> 16) & 0xff), static_cast<char>((bits >> 24) & 0xff)};
  out.write(b, 4);
}

inline float read_f32(std::istream& in, bool little_endian) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw ConfigError("truncated float data");
  }
  const std::uint32_t bits =
      little_endian ? (std::uint32_t{b[0]} | std::uint32_t{b[1]} << 8 | std::uint32_t{b[2]} << 16 |
                       std::uint32_t{b[3]} << 24)
                    : (std::uint32_t{b[3]} | std::uint32_t{b[2]} << 8 | std::uint32_t{b[1]} << 16 |
                       std::uint32_t{b[0]} << 24);
  return std::bit_cast<float>(bits);
}

}  // namespace detail

inline RgbImage read_ppm(std::istream& in) {
  if (detail::next_token(in) != "P6") {
    throw ConfigError("not a binary PPM (P6) file");
  }
  const int w = detail::parse_positive(detail::next_token(in), "PPM width");
  const int h = detail::parse_positive(detail::next_token(in), "PPM height");
  if (detail::parse_positive(detail::next_token(in), "PPM maxval") != 255) {
    throw ConfigError("only maxval 255 PPM files are supported");
  }
  RgbImage image{w, h};
  std::vector<unsigned char> bytes(image.size() * 3);
  if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()))) {
    throw ConfigError("truncated PPM pixel data");
  }
  for (std::size_t i = 0; i < image.size(); ++i) {
    image[i] = Vec3{static_cast<double>(bytes[3 * i]), static_cast<double>(bytes[3 * i + 1]),
                    static_cast<double>(bytes[3 * i + 2])} / 255.0;
  }
  return image;
}

/// Grayscale PFM ("Pf"), little-endian float32, rows stored bottom to top.
inline void write_pfm(std::ostream& out, const DepthImage& depth) {
  out << "Pf\n" << depth.width() << ' ' << depth.height() << "\n-1.0\n";
  for (int v = depth.height() - 1; v >= 0; --v) {
    for (int u = 0; u < depth.width(); ++u) {
      detail::write_f32_le(out, static_cast<float>(depth.at(u, v)));
    }
  }
}

inline DepthImage read_pfm(std::istream& in) {
  if (detail::next_token(in) != "Pf") {
    throw ConfigError("not a grayscale PFM (Pf) file");
  }
  const int w = detail::parse_positive(detail::next_token(in), "PFM width");
  const int h = detail::parse_positive(detail::next_token(in), "PFM height");
  const std::string scale_token = detail::next_token(in);
  double scale = 0.0;
  try {
    scale = std::stod(scale_token);
  } catch (const std::exception&) {
    throw ConfigError("bad PFM scale '" + scale_token + "'");
  }
  if (scale == 0.0) {
    throw ConfigError("PFM scale must be non-zero");
  }
  const bool little = scale < 0.0;
  DepthImage depth{w, h};
  for (int v = h - 1; v >= 0; --v) {
    for (int u = 0; u < w; ++u) {
      depth.at(u, v) = detail::read_f32(in, little);
    }
  }
  return depth;
}

/// ASCII PLY with x, y, z, beam, azimuth, range per point.
inline void write_ply(std::ostream& out, const PointCloud& cloud) {
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.points.size()
      << "\nproperty float x\nproperty float y\nproperty float z\nproperty int beam\nproperty int azimuth\n"
         "property float range\nend_header\n";
  out << std::setprecision(9);
  for (const auto& p : cloud.points) {
    out << static_cast<float>(p.position.x()) << ' ' << static_cast<float>(p.position.y()) << ' '
        << static_cast<float>(p.position.z()) << ' ' << p.beam << ' ' << p.azimuth << ' '
        << static_cast<float>(p.range) << '\n';
  }
}

inline PointCloud read_ply(std::istream& in) {
  std::string line;
  std::size_t count = 0;
  bool header_done = false;
  if (!std::getline(in, line) || line != "ply") {
    throw ConfigError("not a PLY file");
  }
  while (std::getline(in, line)) {
    if (line.rfind("element vertex", 0) == 0) {
      count = std::stoul(line.substr(15));
    } else if (line == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done) {
    throw ConfigError("PLY header has no end_header");
  }
  PointCloud cloud;
  cloud.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    LidarPoint p;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    if (!(in >> x >> y >> z >> p.beam >> p.azimuth >> p.range)) {
      throw ConfigError("truncated PLY vertex list");
    }
    p.position = Vec3{x, y, z};
    cloud.points.push_back(p);
  }
  return cloud;
}

template <typename Writer, typename Value>
void write_file(const std::filesystem::path& path, Writer&& writer, const Value& value) {
  std::ofstream out{path, std::ios::binary};
  if (!out) {
    throw RuntimeFailure("cannot open '" + path.string() + "' for writing");
  }
  writer(out, value);
  if (!out) {
    throw RuntimeFailure("failed writing '" + path.string() + "'");
  }
}

template <typename Reader>
auto read_file(const std::filesystem::path& path, Reader&& reader) {
  std::ifstream in{path, std::ios::binary};
  if (!in) {
    throw ConfigError("cannot open '" + path.string() + "'");
  }
  try {
    return reader(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace nerfsim

#endif
