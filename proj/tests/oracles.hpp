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

#ifndef NERFSIM_TESTS_ORACLES_HPP
#define NERFSIM_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "nerfsim/fit.hpp"
#include "nerfsim/geometry.hpp"
#include "test_utils.hpp"

// Independent reference computations shared by unit tests and the acceptance binary.
namespace nerfsim::testing {

/// n^3 grid over [-1, 1]^3 with random raw parameters.
inline VoxelGridField RandomGrid(Gen& gen, int n = 4) {
  VoxelGridField field{Aabb{Vec3::Constant(-1), Vec3::Constant(1)}, {n, n, n}};
  field.modify_params([&](std::span<double> p) {
    for (std::size_t i = 0; i < p.size(); i += 4) {
      p[i] = gen.uniform(-2, 2);
      p[i + 1] = gen.uniform(-2, 2);
      p[i + 2] = gen.uniform(-2, 2);
      p[i + 3] = gen.uniform(-3, 1.5);
    }
  });
  return field;
}

/// Rays from a radius-2.5 sphere aimed near the origin, with random targets.
inline std::vector<TargetRay> RandomRays(Gen& gen, int count) {
  std::vector<TargetRay> rays;
  for (int i = 0; i < count; ++i) {
    const Vec3 origin = gen.vec3(-1, 1).normalized() * 2.5;
    const Vec3 toward = gen.vec3(-0.5, 0.5);
    rays.push_back(
        TargetRay{Ray{origin, (toward - origin).normalized(), 0.1, 5.0}, gen.vec3(0, 1), static_cast<std::uint64_t>(i)});
  }
  return rays;
}

/// Central finite differences of photometric_loss over every raw parameter.
inline std::vector<double> FiniteDifferenceGradient(const VoxelGridField& field, const std::vector<TargetRay>& rays,
                                                    const RaySampling& sampling, double h) {
  std::vector<double> grad(field.params().size());
  VoxelGridField probe = field;
  const std::vector<double> base(field.params().begin(), field.params().end());
  std::vector<double> shifted = base;
  for (std::size_t i = 0; i < base.size(); ++i) {
    shifted[i] = base[i] + h;
    probe.set_params(shifted);
    const double plus = photometric_loss(probe, rays, sampling);
    shifted[i] = base[i] - h;
    probe.set_params(shifted);
    const double minus = photometric_loss(probe, rays, sampling);
    shifted[i] = base[i];
    grad[i] = (plus - minus) / (2.0 * h);
  }
  return grad;
}

/// Worst elementwise relative error, with a floor of 1e-6 of the largest numeric entry.
inline double MaxRelativeError(const std::vector<double>& analytic, const std::vector<double>& numeric) {
  double scale = 0.0;
  for (double v : numeric) {
    scale = std::max(scale, std::abs(v));
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-6 * scale});
    if (denom > 0.0) {
      worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
    }
  }
  return worst;
}

/// Distance from p along unit d to a sphere of radius r centered at the origin (p inside).
inline double RaySphereExit(const Vec3& p, const Vec3& d, double r) {
  const double b = p.dot(d);
  const double c = p.squaredNorm() - r * r;
  return -b + std::sqrt(b * b - c);
}

}  // namespace testing

#endif
