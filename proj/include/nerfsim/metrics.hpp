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

#ifndef NERFSIM_METRICS_HPP
#define NERFSIM_METRICS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Geometry>

#include "nerfsim/image.hpp"
#include "nerfsim/trajectory.hpp"

/**
 * \file
 * \brief Image, depth and trajectory error metrics.
 */

namespace nerfsim {

namespace detail {
template <typename P>
void require_same_size(const Image<P>& a, const Image<P>& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw std::invalid_argument(std::string(what) + ": image dimensions differ (" + std::to_string(a.width()) +
                                "x" + std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                                std::to_string(b.height()) + ")");
  }
}
}  // namespace detail

/// Peak signal-to-noise ratio in dB with peak 1, MSE over all pixels and channels. Identical images give +inf.
inline double psnr(const RgbImage& a, const RgbImage& b) {
  detail::require_same_size(a, b, "psnr");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += (a[i] - b[i]).squaredNorm();
  }
  const double mse = sum / (3.0 * static_cast<double>(a.size()));
  if (mse == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return 10.0 * std::log10(1.0 / mse);
}

inline double luma(const Vec3& rgb) { return 0.299 * rgb.x() + 0.587 * rgb.y() + 0.114 * rgb.z(); }

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

/// Mean structural similarity on luma, Gaussian window, over all fully-contained window positions.
inline double ssim(const RgbImage& a, const RgbImage& b, const SsimParams& params = {}) {
  detail::require_same_size(a, b, "ssim");
  const int w = a.width();
  const int h = a.height();
  const int win = params.window;
  if (w < win || h < win) {
    throw std::invalid_argument("ssim: images must be at least " + std::to_string(win) + " pixels per side");
  }
  std::vector<double> kernel(static_cast<std::size_t>(win));
  double ksum = 0.0;
  for (int i = 0; i < win; ++i) {
    const double x = i - (win - 1) / 2.0;
    kernel[i] = std::exp(-x * x / (2.0 * params.sigma * params.sigma));
    ksum += kernel[i];
  }
  for (auto& k : kernel) {
    k /= ksum;
  }

  // five planes: x, y, x^2, y^2, xy
  const std::size_t n = a.size();
  std::array<std::vector<double>, 5> planes;
  for (auto& p : planes) {
    p.resize(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double x = luma(a[i]);
    const double y = luma(b[i]);
    planes[0][i] = x;
    planes[1][i] = y;
    planes[2][i] = x * x;
    planes[3][i] = y * y;
    planes[4][i] = x * y;
  }
  const int ow = w - win + 1;
  const int oh = h - win + 1;
  std::array<std::vector<double>, 5> filtered;
  std::vector<double> rows(static_cast<std::size_t>(ow) * h);
  for (int p = 0; p < 5; ++p) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < ow; ++x) {
        double s = 0.0;
        for (int k = 0; k < win; ++k) {
          s += kernel[k] * planes[p][static_cast<std::size_t>(y) * w + x + k];
        }
        rows[static_cast<std::size_t>(y) * ow + x] = s;
      }
    }
    filtered[p].resize(static_cast<std::size_t>(ow) * oh);
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        double s = 0.0;
        for (int k = 0; k < win; ++k) {
          s += kernel[k] * rows[static_cast<std::size_t>(y + k) * ow + x];
        }
        filtered[p][static_cast<std::size_t>(y) * ow + x] = s;
      }
    }
  }
  const double c1 = std::pow(params.k1 * params.dynamic_range, 2);
  const double c2 = std::pow(params.k2 * params.dynamic_range, 2);
  double total = 0.0;
  for (std::size_t i = 0; i < filtered[0].size(); ++i) {
    const double mx = filtered[0][i];
    const double my = filtered[1][i];
    const double vx = filtered[2][i] - mx * mx;
    const double vy = filtered[3][i] - my * my;
    const double cov = filtered[4][i] - mx * my;
    total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(filtered[0].size());
}

/// Depth accuracy summary.
/**
 * `abs_rel` is a ratio (mean |gt - pred| / gt), not a percentage. `delta[k]` is the fraction of
 * jointly-valid pixels with max(gt/pred, pred/gt) < kDepthThresholds[k].
 */
struct DepthErrorReport {
  static constexpr std::array<double, 5> kDepthThresholds{1.05, 1.10, 1.25, 1.25 * 1.25, 1.25 * 1.25 * 1.25};

  double abs_rel = 0.0;
  std::array<double, 5> delta{};
  std::size_t valid_pixel_count = 0;
};

inline bool valid_depth(double d) { return d > 0.0 && std::isfinite(d); }

/// Compares pixels valid (> 0, finite) in both maps. Throws when none are.
inline DepthErrorReport depth_error(const DepthImage& pred, const DepthImage& gt) {
  detail::require_same_size(pred, gt, "depth_error");
  DepthErrorReport report;
  std::array<std::size_t, 5> hits{};
  double rel_sum = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const double p = pred[i];
    const double g = gt[i];
    if (!valid_depth(p) || !valid_depth(g)) {
      continue;
    }
    ++report.valid_pixel_count;
    rel_sum += std::abs(g - p) / g;
    const double ratio = std::max(g / p, p / g);
    for (std::size_t k = 0; k < hits.size(); ++k) {
      hits[k] += ratio < DepthErrorReport::kDepthThresholds[k] ? 1 : 0;
    }
  }
  if (report.valid_pixel_count == 0) {
    throw std::invalid_argument("depth_error: no pixel is valid in both depth maps");
  }
  const auto n = static_cast<double>(report.valid_pixel_count);
  report.abs_rel = rel_sum / n;
  for (std::size_t k = 0; k < hits.size(); ++k) {
    report.delta[k] = static_cast<double>(hits[k]) / n;
  }
  return report;
}

struct AteOptions {
  /// Maximum timestamp difference for associating an estimated pose with a reference pose.
  double max_time_difference = 0.02;
  /// Rigidly align the estimate onto the reference (least squares, no scale) before measuring.
  bool align = true;
};

/// Nearest-timestamp pairs (estimated index, reference index) within the tolerance.
inline std::vector<std::pair<std::size_t, std::size_t>> associate(const Trajectory& estimated,
                                                                   const Trajectory& reference,
                                                                   double max_time_difference) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  const auto& ref = reference.samples();
  for (std::size_t i = 0; i < estimated.size(); ++i) {
    const double t = estimated.samples()[i].time;
    const auto it = std::lower_bound(ref.begin(), ref.end(), t,
                                     [](const StampedPose& s, double value) { return s.time < value; });
    std::size_t best = ref.size();
    double best_dt = std::numeric_limits<double>::infinity();
    for (auto c : {it, it == ref.begin() ? it : it - 1}) {
      if (c != ref.end() && std::abs(c->time - t) < best_dt) {
        best_dt = std::abs(c->time - t);
        best = static_cast<std::size_t>(c - ref.begin());
      }
    }
    if (best < ref.size() && best_dt <= max_time_difference) {
      pairs.emplace_back(i, best);
    }
  }
  return pairs;
}

/// Root-mean-square translational error after timestamp association and optional rigid alignment.
inline double ate_rmse(const Trajectory& estimated, const Trajectory& reference, const AteOptions& options = {}) {
  const auto pairs = associate(estimated, reference, options.max_time_difference);
  if (pairs.size() < 3) {
    throw std::invalid_argument("ate_rmse: fewer than 3 associated pose pairs (" + std::to_string(pairs.size()) +
                                ")");
  }
  Eigen::Matrix3Xd est(3, static_cast<Eigen::Index>(pairs.size()));
  Eigen::Matrix3Xd ref(3, static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    est.col(static_cast<Eigen::Index>(k)) = estimated.samples()[pairs[k].first].pose.translation();
    ref.col(static_cast<Eigen::Index>(k)) = reference.samples()[pairs[k].second].pose.translation();
  }
  if (options.align) {
    const Eigen::Matrix4d t = Eigen::umeyama(est, ref, false);
    est = (t.topLeftCorner<3, 3>() * est).colwise() + t.topRightCorner<3, 1>();
  }
  return std::sqrt((est - ref).colwise().squaredNorm().mean());
}

}  // namespace nerfsim

#endif
