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

#ifndef NERFSIM_FIELD_HPP
#define NERFSIM_FIELD_HPP

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nerfsim/config.hpp"
#include "nerfsim/errors.hpp"
#include "nerfsim/geometry.hpp"

/**
 * \file
 * \brief Radiance fields: point + view direction -> (color, density).
 */

namespace nerfsim {

/// Color in [0, 1]^3 and volume density (1/m) at a point.
struct RadianceSample {
  Vec3 color = Vec3::Zero();
  double density = 0.0;

  bool operator==(const RadianceSample&) const = default;
};

/// Anything that can be queried as `field.eval(x, dir) -> RadianceSample`.
/**
 * Implementations must be safe to evaluate concurrently through a const reference.
 */
template <typename F>
concept RadianceField = requires(const F& field, const Vec3& x, const Vec3& dir) {
  { field.eval(x, dir) } -> std::convertible_to<RadianceSample>;
};

/// Checked query: rejects non-finite positions and non-unit directions.
template <RadianceField F>
RadianceSample eval_field(const F& field, const Vec3& x, const Vec3& dir) {
  if (!all_finite(x) || !all_finite(dir)) {
    throw std::invalid_argument("eval_field: non-finite query");
  }
  if (std::abs(dir.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("eval_field: direction must be unit length");
  }
  return field.eval(x, dir);
}

/// Field with zero density everywhere.
struct EmptyField {
  RadianceSample eval(const Vec3&, const Vec3&) const { return {}; }
};

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  [[nodiscard]] bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  [[nodiscard]] bool contains(const Aabb& other) const { return contains(other.min) && contains(other.max); }
  [[nodiscard]] Vec3 center() const { return 0.5 * (min + max); }
  [[nodiscard]] Vec3 extent() const { return max - min; }

  /// Corner i has x from bit 0, y from bit 1, z from bit 2 (0 = min, 1 = max).
  [[nodiscard]] std::array<Vec3, 8> corners() const {
    std::array<Vec3, 8> out;
    for (int i = 0; i < 8; ++i) {
      out[i] = Vec3{(i & 1) ? max.x() : min.x(), (i & 2) ? max.y() : min.y(), (i & 4) ? max.z() : min.z()};
    }
    return out;
  }

  void expand(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }

  /// True when min exceeds max on some axis, as for Aabb::empty().
  [[nodiscard]] bool is_empty() const { return (min.array() > max.array()).any(); }

  static Aabb empty() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return Aabb{Vec3::Constant(inf), Vec3::Constant(-inf)};
  }

  bool operator==(const Aabb&) const = default;
};

/// Constant-color, constant-density solid.
struct Primitive {
  enum class Kind { kBox, kSphere };

  Kind kind = Kind::kBox;
  Vec3 min = Vec3::Zero();     ///< box only
  Vec3 max = Vec3::Zero();     ///< box only
  Vec3 center = Vec3::Zero();  ///< sphere only
  double radius = 0.0;         ///< sphere only
  double inner_radius = 0.0;   ///< sphere only; > 0 makes a hollow shell
  Vec3 color = Vec3::Zero();
  double density = 0.0;

  static Primitive box(const Vec3& lo, const Vec3& hi, const Vec3& color, double density) {
    Primitive p;
    p.kind = Kind::kBox;
    p.min = lo;
    p.max = hi;
    p.color = color;
    p.density = density;
    return p;
  }

  static Primitive sphere(const Vec3& c, double r, const Vec3& color, double density, double inner = 0.0) {
    Primitive p;
    p.kind = Kind::kSphere;
    p.center = c;
    p.radius = r;
    p.inner_radius = inner;
    p.color = color;
    p.density = density;
    return p;
  }

  [[nodiscard]] bool contains(const Vec3& x) const {
    if (kind == Kind::kBox) {
      return (x.array() >= min.array()).all() && (x.array() <= max.array()).all();
    }
    const double r2 = (x - center).squaredNorm();
    return r2 <= radius * radius && r2 >= inner_radius * inner_radius;
  }

  [[nodiscard]] Aabb bounds() const {
    if (kind == Kind::kBox) {
      return Aabb{min, max};
    }
    return Aabb{center - Vec3::Constant(radius), center + Vec3::Constant(radius)};
  }
};

/// Closed-form scene of boxes and spheres; empty space has zero density.
/**
 * Overlapping primitives add their densities and blend colors weighted by density.
 */
class AnalyticField {
 public:
  AnalyticField() = default;
  AnalyticField(const Aabb& bounds, std::vector<Primitive> primitives)
      : bounds_{bounds}, primitives_{std::move(primitives)} {
    for (const auto& p : primitives_) {
      if (!(p.density >= 0.0) || (p.color.array() < 0.0).any() || (p.color.array() > 1.0).any()) {
        throw std::invalid_argument("AnalyticField: densities must be >= 0 and colors in [0, 1]");
      }
    }
  }

  [[nodiscard]] const Aabb& bounds() const { return bounds_; }
  [[nodiscard]] const std::vector<Primitive>& primitives() const { return primitives_; }

  RadianceSample eval(const Vec3& x, const Vec3& /*dir*/) const {
    RadianceSample out;
    int contributors = 0;
    Vec3 weighted = Vec3::Zero();
    for (const auto& p : primitives_) {
      if (p.density > 0.0 && p.contains(x)) {
        if (contributors++ == 0) {
          out = RadianceSample{p.color, p.density};
        }
        weighted += p.density * p.color;
        if (contributors > 1) {
          out.density += p.density;
        }
      }
    }
    if (contributors > 1) {
      out.color = (weighted / out.density).cwiseMax(0.0).cwiseMin(1.0);
    }
    return out;
  }

 private:
  Aabb bounds_;
  std::vector<Primitive> primitives_;
};

/// Builds an analytic scene from its JSON description.
/**
 * Layout: `{"bbox": {"min": [x,y,z], "max": [x,y,z]}, "primitives": [...]}` where each primitive is
 * `{"kind": "box", "min", "max", "color", "density"}` or `{"kind": "sphere", "center", "radius", "color", "density"}` with an optional
 * `inner_radius` for hollow shells.
 * Primitives must lie inside the bbox.
 */
inline AnalyticField make_synthetic_scene(const Json& description, const std::string& source = "scene") {
  const ConfigNode root{description, ""};
  const ConfigNode bbox_node = root.child("bbox");
  const Aabb bbox{bbox_node.vec3("min"), bbox_node.vec3("max")};
  if (!(bbox.min.array() < bbox.max.array()).all()) {
    bbox_node.fail("", "min must be strictly below max on every axis");
  }
  std::vector<Primitive> primitives;
  for (const auto& node : root.objects("primitives")) {
    const std::string kind = node.string("kind");
    const Vec3 color = node.color("color");
    const double density = node.number("density");
    if (density < 0.0) {
      node.fail("density", "must be >= 0");
    }
    Primitive p;
    if (kind == "box") {
      p = Primitive::box(node.vec3("min"), node.vec3("max"), color, density);
      if (!(p.min.array() <= p.max.array()).all()) {
        node.fail("max", "box max must be >= min");
      }
    } else if (kind == "sphere") {
      p = Primitive::sphere(node.vec3("center"), node.positive("radius"), color, density,
                            node.non_negative("inner_radius", 0.0));
      if (p.inner_radius >= p.radius) {
        node.fail("inner_radius", "must be below radius");
      }
    } else {
      node.fail("kind", "unknown primitive kind '" + kind + "' (expected box or sphere)");
    }
    if (!bbox.contains(p.bounds())) {
      node.fail("", "primitive extends outside the scene bbox");
    }
    primitives.push_back(p);
  }
  try {
    return AnalyticField{bbox, std::move(primitives)};
  } catch (const std::invalid_argument& e) {
    throw ConfigError(source + ": " + e.what());
  }
}

namespace detail {
inline Json to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }
}  // namespace detail

/// Canonical JSON form of an analytic scene; `scene_to_json(make_synthetic_scene(s))` normalizes `s`.
inline Json scene_to_json(const AnalyticField& field) {
  Json prims = Json::array();
  for (const auto& p : field.primitives()) {
    Json j;
    if (p.kind == Primitive::Kind::kBox) {
      j["kind"] = "box";
      j["min"] = detail::to_json(p.min);
      j["max"] = detail::to_json(p.max);
    } else {
      j["kind"] = "sphere";
      j["center"] = detail::to_json(p.center);
      j["radius"] = p.radius;
      if (p.inner_radius > 0.0) {
        j["inner_radius"] = p.inner_radius;
      }
    }
    j["color"] = detail::to_json(p.color);
    j["density"] = p.density;
    prims.push_back(std::move(j));
  }
  return Json{{"bbox", {{"min", detail::to_json(field.bounds().min)}, {"max", detail::to_json(field.bounds().max)}}},
              {"primitives", std::move(prims)}};
}

inline double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double softplus(double x) {
  if (x > 30.0) {
    return x + std::log1p(std::exp(-x));
  }
  return std::log1p(std::exp(x));
}

/// Inverse of softplus for y > 0.
inline double softplus_inverse(double y) {
  if (y > 30.0) {
    return y + std::log(-std::expm1(-y));
  }
  return std::log(std::expm1(y));
}

/// Trilinear interpolation footprint of a point in a vertex grid.
struct TrilinearStencil {
  std::array<std::size_t, 8> vertex{};
  std::array<double, 8> weight{};
};

/// Trainable dense grid of raw per-vertex parameters (3 color + 1 density).
/**
 * Vertices sit on a regular lattice spanning `bounds` (resolution counts vertices per axis, each >= 2).
 * Activated color is logistic(raw), activated density is softplus(raw); queries interpolate the activated
 * vertex values trilinearly. Outside `bounds` the density is zero.
 *
 * Raw parameters are laid out vertex-major with x fastest: `((k * ny + j) * nx + i) * 4 + channel`.
 */
class VoxelGridField {
 public:
  static constexpr int kChannels = 4;
  static constexpr int kDensity = 3;

  VoxelGridField(const Aabb& bounds, const std::array<int, 3>& resolution)
      : bounds_{bounds}, resolution_{resolution} {
    if (!(bounds.min.array() < bounds.max.array()).all() || !all_finite(bounds.min) || !all_finite(bounds.max)) {
      throw std::invalid_argument("VoxelGridField: bounds must be finite with min < max");
    }
    for (int n : resolution) {
      if (n < 2) {
        throw std::invalid_argument("VoxelGridField: resolution must be >= 2 vertices per axis");
      }
    }
    params_.assign(vertex_count() * kChannels, 0.0);
    activated_.assign(params_.size(), 0.0);
    refresh();
  }

  /// Near-empty initialization: density softplus^-1(density), mid-gray color.
  static VoxelGridField initialized(const Aabb& bounds, const std::array<int, 3>& resolution,
                                    double density = 0.01) {
    VoxelGridField field{bounds, resolution};
    const double raw = softplus_inverse(density);
    field.modify_params([raw](std::span<double> p) {
      for (std::size_t v = 0; v < p.size(); v += kChannels) {
        p[v + kDensity] = raw;
      }
    });
    return field;
  }

  [[nodiscard]] const Aabb& bounds() const { return bounds_; }
  [[nodiscard]] const std::array<int, 3>& resolution() const { return resolution_; }
  [[nodiscard]] std::size_t vertex_count() const {
    return static_cast<std::size_t>(resolution_[0]) * resolution_[1] * resolution_[2];
  }
  [[nodiscard]] std::size_t vertex_index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * resolution_[1] + j) * resolution_[0] + i;
  }
  [[nodiscard]] Vec3 vertex_position(int i, int j, int k) const {
    const Vec3 step = spacing();
    return bounds_.min + Vec3{i * step.x(), j * step.y(), k * step.z()};
  }
  [[nodiscard]] Vec3 spacing() const {
    return bounds_.extent().cwiseQuotient(
        Vec3{resolution_[0] - 1.0, resolution_[1] - 1.0, resolution_[2] - 1.0});
  }

  [[nodiscard]] std::span<const double> params() const { return params_; }

  /// Mutates raw parameters and recomputes activations. Requires exclusive access.
  template <typename Fn>
  void modify_params(Fn&& fn) {
    fn(std::span<double>{params_});
    refresh();
  }

  void set_params(std::span<const double> raw) {
    if (raw.size() != params_.size()) {
      throw std::invalid_argument("VoxelGridField: parameter count mismatch");
    }
    std::copy(raw.begin(), raw.end(), params_.begin());
    refresh();
  }

  [[nodiscard]] double activated(std::size_t vertex, int channel) const {
    return activated_[vertex * kChannels + channel];
  }

  /// Interpolation footprint of x; false when x lies outside the grid bounds.
  bool stencil(const Vec3& x, TrilinearStencil& out) const {
    std::array<std::size_t, 3> base{};
    std::array<double, 3> frac{};
    for (int a = 0; a < 3; ++a) {
      const double g = (x[a] - bounds_.min[a]) / (bounds_.max[a] - bounds_.min[a]) * (resolution_[a] - 1);
      if (!(g >= 0.0) || g > resolution_[a] - 1) {
        return false;
      }
      const int i0 = std::min(static_cast<int>(g), resolution_[a] - 2);
      base[a] = static_cast<std::size_t>(i0);
      frac[a] = g - i0;
    }
    constexpr std::size_t sx = 1;
    const std::size_t sy = static_cast<std::size_t>(resolution_[0]);
    const std::size_t sz = sy * resolution_[1];
    const std::size_t origin = base[2] * sz + base[1] * sy + base[0];
    for (int c = 0; c < 8; ++c) {
      const int dx = c & 1;
      const int dy = (c >> 1) & 1;
      const int dz = (c >> 2) & 1;
      out.vertex[c] = origin + dx * sx + dy * sy + dz * sz;
      out.weight[c] = (dx ? frac[0] : 1.0 - frac[0]) * (dy ? frac[1] : 1.0 - frac[1]) *
                      (dz ? frac[2] : 1.0 - frac[2]);
    }
    return true;
  }

  RadianceSample eval(const Vec3& x, const Vec3& /*dir*/) const {
    TrilinearStencil s;
    if (!stencil(x, s)) {
      return {};
    }
    return interpolate(s);
  }

  [[nodiscard]] RadianceSample interpolate(const TrilinearStencil& s) const {
    RadianceSample out;
    for (int c = 0; c < 8; ++c) {
      const double* a = &activated_[s.vertex[c] * kChannels];
      const double w = s.weight[c];
      out.color += w * Vec3{a[0], a[1], a[2]};
      out.density += w * a[kDensity];
    }
    return out;
  }

  /// Recomputes activated values from raw parameters.
  void refresh() {
    for (std::size_t v = 0; v < params_.size(); v += kChannels) {
      for (int c = 0; c < 3; ++c) {
        activated_[v + c] = sigmoid(params_[v + c]);
      }
      activated_[v + kDensity] = softplus(params_[v + kDensity]);
    }
  }

 private:
  Aabb bounds_;
  std::array<int, 3> resolution_;
  std::vector<double> params_;
  std::vector<double> activated_;
};

inline constexpr char kVoxelMagic[16] = {'N', 'E', 'R', 'F', 'S', 'I', 'M', '-', 'V', 'O', 'X', 'E', 'L', '-', 'v', '1'};

namespace detail {

template <typename T>
void write_le(std::ostream& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  auto bits = std::bit_cast<U>(value);
  char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>(bits & 0xff);
    bits >>= 8;
  }
  out.write(bytes, sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw ConfigError("voxel checkpoint truncated");
  }
  U bits = 0;
  for (std::size_t i = sizeof(T); i-- > 0;) {
    bits = (bits << 8) | bytes[i];
  }
  return std::bit_cast<T>(bits);
}

}  // namespace detail

/// Binary checkpoint: 16-byte magic, bbox (6 x f64 LE), resolution (3 x u32 LE), raw params (f32 LE).
inline void write_voxel_checkpoint(std::ostream& out, const VoxelGridField& field) {
  out.write(kVoxelMagic, sizeof(kVoxelMagic));
  for (int a = 0; a < 3; ++a) {
    detail::write_le<double>(out, field.bounds().min[a]);
  }
  for (int a = 0; a < 3; ++a) {
    detail::write_le<double>(out, field.bounds().max[a]);
  }
  for (int n : field.resolution()) {
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(n));
  }
  for (double p : field.params()) {
    detail::write_le<float>(out, static_cast<float>(p));
  }
}

inline VoxelGridField read_voxel_checkpoint(std::istream& in) {
  char magic[16];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kVoxelMagic, sizeof(magic)) != 0) {
    throw ConfigError("not a voxel field checkpoint (bad magic)");
  }
  Aabb bounds;
  for (int a = 0; a < 3; ++a) {
    bounds.min[a] = detail::read_le<double>(in);
  }
  for (int a = 0; a < 3; ++a) {
    bounds.max[a] = detail::read_le<double>(in);
  }
  std::array<int, 3> resolution{};
  for (auto& n : resolution) {
    const auto v = detail::read_le<std::uint32_t>(in);
    if (v < 2 || v > 4096) {
      throw ConfigError("voxel checkpoint resolution out of range");
    }
    n = static_cast<int>(v);
  }
  try {
    VoxelGridField field{bounds, resolution};
    std::vector<double> raw(field.params().size());
    for (auto& p : raw) {
      p = detail::read_le<float>(in);
      if (!std::isfinite(p)) {
        throw ConfigError("voxel checkpoint holds non-finite parameters");
      }
    }
    if (in.peek() != std::char_traits<char>::eof()) {
      throw ConfigError("voxel checkpoint has trailing bytes");
    }
    field.set_params(raw);
    return field;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("voxel checkpoint: ") + e.what());
  }
}

}  // namespace nerfsim

#endif
