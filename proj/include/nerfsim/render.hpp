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

#ifndef NERFSIM_RENDER_HPP
#define NERFSIM_RENDER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nerfsim/field.hpp"
#include "nerfsim/geometry.hpp"
#include "nerfsim/image.hpp"
#include "nerfsim/parallel.hpp"
#include "nerfsim/rng.hpp"

/**
 * \file
 * \brief Emission-absorption volume rendering and the camera, depth and LiDAR sensors built on it.
 *
 * For samples t_1 < ... < t_N along a ray with spacing delta_i = t_{i+1} - t_i (delta_N = t_far - t_N):
 *
 *   alpha_i = 1 - exp(-sigma_i * delta_i)
 *   T_i     = exp(-sum_{j<i} sigma_j * delta_j)
 *   C       = sum_i alpha_i * T_i * c_i
 *
 * Expected depth is sum_i alpha_i T_i t_i normalized by the accumulated opacity sum_i alpha_i T_i.
 */

namespace nerfsim {

enum class SamplingStrategy { kUniform, kStratified };

/// Accumulated opacity below which a ray reports no depth.
inline constexpr double kDepthOpacityFloor = 0.05;

struct RaySampling {
  int samples = 128;
  SamplingStrategy strategy = SamplingStrategy::kUniform;
  std::uint64_t seed = 0;

  void validate() const {
    if (samples < 1) {
      throw std::invalid_argument("RaySampling: at least one sample per ray is required");
    }
  }
};

/// Generates the N sample distances of one ray in (t_near, t_far], strictly increasing.
/**
 * Uniform sampling takes stratum midpoints. Stratified sampling draws one offset per stratum from a
 * counter-based stream keyed on (seed, ray_id), so a ray's samples do not depend on evaluation order.
 */
class SampleSequence {
 public:
  SampleSequence(const Ray& ray, const RaySampling& sampling, std::uint64_t ray_id)
      : near_{ray.t_near},
        step_{(ray.t_far - ray.t_near) / sampling.samples},
        count_{sampling.samples},
        stratified_{sampling.strategy == SamplingStrategy::kStratified},
        rng_{sampling.seed, ray_id} {}

  /// Distance of sample i; must be called with i = 0, 1, 2, ... in order.
  double next() {
    const int i = index_++;
    const double offset = stratified_ ? 1.0 - rng_.uniform() : 0.5;
    // offset in (0, 1] keeps every sample strictly above t_near
    return near_ + (i + offset) * step_;
  }

  [[nodiscard]] int count() const { return count_; }

 private:
  double near_;
  double step_;
  int count_;
  bool stratified_;
  CounterRng rng_;
  int index_ = 0;
};

inline std::vector<double> sample_distances(const Ray& ray, const RaySampling& sampling, std::uint64_t ray_id) {
  sampling.validate();
  SampleSequence seq{ray, sampling, ray_id};
  std::vector<double> t(static_cast<std::size_t>(sampling.samples));
  for (auto& ti : t) {
    ti = seq.next();
  }
  return t;
}

struct RayRadiance {
  Vec3 color = Vec3::Zero();
  /// sum_i alpha_i T_i
  double opacity = 0.0;
  /// T_{N+1}, the transmittance past the last sample.
  double transmittance = 1.0;
  /// Opacity-normalized expected distance; meaningful only when depth_valid.
  double depth = 0.0;
  bool depth_valid = false;
};

/// Running accumulator for the compositing sums; feeds one sample at a time in ray order.
class Compositor {
 public:
  void add(double t, double delta, double density, const Vec3& color) {
    const double tau = density * delta;
    const double alpha = -std::expm1(-tau);
    const double weight = transmittance_ * alpha;
    color_ += weight * color;
    opacity_ += weight;
    depth_sum_ += weight * t;
    optical_depth_ += tau;
    transmittance_ = std::exp(-optical_depth_);
  }

  [[nodiscard]] double transmittance() const { return transmittance_; }

  [[nodiscard]] RayRadiance finish(double t_near, double t_far) const {
    RayRadiance out;
    out.color = color_.cwiseMax(0.0).cwiseMin(1.0);
    out.opacity = std::clamp(opacity_, 0.0, 1.0);
    out.transmittance = transmittance_;
    if (opacity_ >= kDepthOpacityFloor) {
      out.depth = std::clamp(depth_sum_ / opacity_, t_near, t_far);
      out.depth_valid = true;
    }
    return out;
  }

 private:
  Vec3 color_ = Vec3::Zero();
  double opacity_ = 0.0;
  double depth_sum_ = 0.0;
  double optical_depth_ = 0.0;
  double transmittance_ = 1.0;
};

/// Composites explicit per-sample values; all spans must have the same non-zero length.
inline RayRadiance composite_samples(std::span<const double> t, std::span<const double> delta,
                                     std::span<const double> density, std::span<const Vec3> color) {
  if (t.empty() || delta.size() != t.size() || density.size() != t.size() || color.size() != t.size()) {
    throw std::invalid_argument("composite_samples: need equally sized, non-empty sample arrays");
  }
  Compositor acc;
  for (std::size_t i = 0; i < t.size(); ++i) {
    acc.add(t[i], delta[i], density[i], color[i]);
  }
  return acc.finish(t.front(), t.back() + delta.back());
}

/// Volume-renders one ray through `field`.
template <RadianceField F>
RayRadiance composite_ray(const Ray& ray, const F& field, const RaySampling& sampling, std::uint64_t ray_id = 0) {
  sampling.validate();
  SampleSequence seq{ray, sampling, ray_id};
  Compositor acc;
  double t = seq.next();
  for (int i = 0; i < sampling.samples; ++i) {
    const double t_next = i + 1 < sampling.samples ? seq.next() : ray.t_far;
    const RadianceSample s = field.eval(ray.at(t), ray.direction);
    acc.add(t, t_next - t, s.density, s.color);
    t = t_next;
  }
  return acc.finish(ray.t_near, ray.t_far);
}

/// Camera rays for every pixel, composited in parallel over rows. Ray id of pixel (u, v) is v * W + u.
template <RadianceField F, typename Emit>
void render_pixels(const CameraIntrinsics& k, const Pose& world_from_cam, const F& field,
                   const RaySampling& sampling, ClipRange clip, Emit&& emit) {
  sampling.validate();
  const auto width = static_cast<std::uint64_t>(k.width());
  parallel_for(static_cast<std::size_t>(k.height()), [&](std::size_t row) {
    const int v = static_cast<int>(row);
    for (int u = 0; u < k.width(); ++u) {
      const Ray ray = pixel_ray(u, v, k, world_from_cam, clip);
      emit(u, v, composite_ray(ray, field, sampling, v * width + u));
    }
  });
}

template <RadianceField F>
RgbImage render_camera(const CameraIntrinsics& k, const Pose& world_from_cam, const F& field,
                       const RaySampling& sampling, ClipRange clip = {}) {
  RgbImage image{k.width(), k.height()};
  render_pixels(k, world_from_cam, field, sampling, clip,
                [&](int u, int v, const RayRadiance& r) { image.at(u, v) = r.color; });
  return image;
}

/// Expected depth per pixel in meters along the ray; 0 where the ray is too transparent.
template <RadianceField F>
DepthImage render_depth(const CameraIntrinsics& k, const Pose& world_from_cam, const F& field,
                        const RaySampling& sampling, ClipRange clip = {}) {
  DepthImage depth{k.width(), k.height(), 0.0};
  render_pixels(k, world_from_cam, field, sampling, clip, [&](int u, int v, const RayRadiance& r) {
    depth.at(u, v) = r.depth_valid ? r.depth : 0.0;
  });
  return depth;
}

/// Unit direction for horizontal angle theta and polar angle phi (measured from +z).
inline Vec3 lidar_direction(double theta, double phi) {
  return Vec3{std::cos(theta) * std::sin(phi), std::sin(theta) * std::sin(phi), std::cos(phi)};
}

/// Spinning multi-beam LiDAR.
struct LidarSpec {
  int channels = 16;
  /// Beam elevations in degrees above the sensor's horizontal plane.
  double vfov_min_deg = -15.0;
  double vfov_max_deg = 15.0;
  /// Rays per revolution; azimuth spacing is 2*pi / azimuth_count.
  int azimuth_count = 1024;
  double min_range = 0.05;
  double max_range = 10.0;
  /// Minimum accumulated opacity for a return.
  double opacity_threshold = 0.5;

  void validate() const {
    if (channels < 1 || azimuth_count < 1) {
      throw std::invalid_argument("LidarSpec: channels and azimuth_count must be >= 1");
    }
    if (!(vfov_min_deg < vfov_max_deg) || vfov_min_deg < -90.0 || vfov_max_deg > 90.0) {
      throw std::invalid_argument("LidarSpec: require -90 <= vfov_min < vfov_max <= 90 degrees");
    }
    if (!(min_range >= 0.0) || !(min_range < max_range) || !std::isfinite(max_range)) {
      throw std::invalid_argument("LidarSpec: require 0 <= min_range < max_range");
    }
    if (!(opacity_threshold >= 0.0 && opacity_threshold <= 1.0)) {
      throw std::invalid_argument("LidarSpec: opacity_threshold must lie in [0, 1]");
    }
  }
};

/// Beam elevations in degrees, evenly spaced and including both FoV limits. A single beam sits mid-FoV.
inline std::vector<double> beam_elevations_deg(const LidarSpec& spec) {
  spec.validate();
  std::vector<double> out(static_cast<std::size_t>(spec.channels));
  if (spec.channels == 1) {
    out[0] = 0.5 * (spec.vfov_min_deg + spec.vfov_max_deg);
    return out;
  }
  const double step = (spec.vfov_max_deg - spec.vfov_min_deg) / (spec.channels - 1);
  for (int k = 0; k < spec.channels; ++k) {
    out[k] = spec.vfov_min_deg + k * step;
  }
  out.back() = spec.vfov_max_deg;
  return out;
}

/// Sensor-frame direction of beam k at azimuth index m.
inline Vec3 lidar_beam_direction(double elevation_deg, int azimuth_index, int azimuth_count) {
  const double theta = 2.0 * M_PI * azimuth_index / azimuth_count;
  const double phi = 0.5 * M_PI - elevation_deg * M_PI / 180.0;
  return lidar_direction(theta, phi);
}

/// One revolution of returns, ordered beam-major then by azimuth. Ray id is beam * azimuth_count + m.
template <RadianceField F>
PointCloud render_lidar(const LidarSpec& spec, const Pose& world_from_sensor, const F& field,
                        const RaySampling& sampling) {
  sampling.validate();
  const auto elevations = beam_elevations_deg(spec);
  std::vector<std::vector<LidarPoint>> rows(elevations.size());
  parallel_for(elevations.size(), [&](std::size_t beam) {
    auto& row = rows[beam];
    for (int m = 0; m < spec.azimuth_count; ++m) {
      const Vec3 d = world_from_sensor.rotate(lidar_beam_direction(elevations[beam], m, spec.azimuth_count));
      const Ray ray{world_from_sensor.translation(), d.normalized(), spec.min_range, spec.max_range};
      const RayRadiance r =
          composite_ray(ray, field, sampling, static_cast<std::uint64_t>(beam) * spec.azimuth_count + m);
      if (r.depth_valid && r.opacity >= spec.opacity_threshold && r.depth <= spec.max_range) {
        row.push_back(LidarPoint{ray.at(r.depth), static_cast<int>(beam), m, r.depth});
      }
    }
  });
  PointCloud cloud;
  for (auto& row : rows) {
    cloud.points.insert(cloud.points.end(), row.begin(), row.end());
  }
  return cloud;
}

}  // namespace nerfsim

#endif
