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

#ifndef NERFSIM_DATASET_HPP
#define NERFSIM_DATASET_HPP

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "nerfsim/config.hpp"
#include "nerfsim/errors.hpp"
#include "nerfsim/field.hpp"
#include "nerfsim/fit.hpp"
#include "nerfsim/geometry.hpp"
#include "nerfsim/image.hpp"
#include "nerfsim/render.hpp"

/**
 * \file
 * \brief Posed image datasets on disk.
 *
 * Layout of a dataset directory:
 *
 *     intrinsics.json   {"fx", "fy", "cx", "cy", "width", "height"}
 *     poses.txt         TUM lines, timestamp = view index
 *     images/000.ppm    one P6 image per pose, in pose order
 *     index.csv         index,image,timestamp
 */

namespace nerfsim {

inline Json intrinsics_to_json(const CameraIntrinsics& k) {
  return Json{{"fx", k.fx()}, {"fy", k.fy()}, {"cx", k.cx()}, {"cy", k.cy()}, {"width", k.width()},
              {"height", k.height()}};
}

/// Accepts either explicit `fx, fy, cx, cy` or a horizontal `hfov_deg`, plus `width` and `height`.
inline CameraIntrinsics intrinsics_from_json(const ConfigNode& node) {
  const auto width = node.integer("width");
  const auto height = node.integer("height");
  if (width < 1 || height < 1 || width > 16384 || height > 16384) {
    node.fail("width", "image dimensions must lie in [1, 16384]");
  }
  if (node.has("hfov_deg")) {
    const double fov = node.positive("hfov_deg");
    if (fov >= 180.0) {
      node.fail("hfov_deg", "must be below 180");
    }
    return CameraIntrinsics::from_fov(fov, static_cast<int>(width), static_cast<int>(height));
  }
  return CameraIntrinsics{node.positive("fx"), node.positive("fy"), node.number("cx"), node.number("cy"),
                          static_cast<int>(width), static_cast<int>(height)};
}

/// Cameras evenly spaced on a circle of `radius` around `target`, cycling through `heights`, all looking at `target`.
inline std::vector<StampedPose> orbit_poses(int count, double radius, std::span<const double> heights,
                                            const Vec3& target = Vec3::Zero()) {
  if (count < 1 || heights.empty() || !(radius > 0.0)) {
    throw std::invalid_argument("orbit_poses: need count >= 1, radius > 0 and at least one height");
  }
  std::vector<StampedPose> out;
  for (int i = 0; i < count; ++i) {
    const double a = 2.0 * M_PI * i / count;
    const double z = heights[static_cast<std::size_t>(i) % heights.size()];
    out.push_back({static_cast<double>(i),
                   look_at(target + Vec3{radius * std::cos(a), radius * std::sin(a), z}, target)});
  }
  return out;
}

/// Renders `field` from every pose.
template <RadianceField F>
PosedImageSet render_views(const F& field, const std::vector<StampedPose>& poses, const CameraIntrinsics& k,
                           const RaySampling& sampling, ClipRange clip = {}) {
  PosedImageSet set;
  for (const auto& sp : poses) {
    set.views.push_back({sp.pose, k, render_camera(k, sp.pose, field, sampling, clip)});
  }
  return set;
}

inline std::string view_image_name(std::size_t index) {
  char name[32];
  std::snprintf(name, sizeof(name), "images/%03zu.ppm", index);
  return name;
}

inline void write_dataset(const std::filesystem::path& dir, const PosedImageSet& set) {
  if (set.views.empty()) {
    throw std::invalid_argument("write_dataset: no views");
  }
  std::filesystem::create_directories(dir / "images");
  {
    std::ofstream out{dir / "intrinsics.json"};
    out << intrinsics_to_json(set.views.front().intrinsics).dump(2) << '\n';
  }
  std::vector<StampedPose> poses;
  std::ofstream index{dir / "index.csv"};
  index << "index,image,timestamp\n";
  for (std::size_t i = 0; i < set.views.size(); ++i) {
    if (!(set.views[i].intrinsics == set.views.front().intrinsics)) {
      throw std::invalid_argument("write_dataset: all views must share one camera");
    }
    poses.push_back({static_cast<double>(i), set.views[i].world_from_cam});
    write_file(dir / view_image_name(i), write_ppm, set.views[i].image);
    index << i << ',' << view_image_name(i) << ',' << i << '\n';
  }
  std::ofstream pose_file{dir / "poses.txt"};
  pose_file << "# timestamp tx ty tz qx qy qz qw (camera to world, camera +z forward, +y down)\n";
  write_tum(pose_file, poses);
}

/// Loads a dataset directory and applies the held-out split.
inline PosedImageSet read_dataset(const std::filesystem::path& dir, std::size_t heldout_every = 8) {
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError("dataset directory '" + dir.string() + "' does not exist");
  }
  const Json intrinsics_json = load_json(dir / "intrinsics.json");
  const CameraIntrinsics k = intrinsics_from_json(ConfigNode{intrinsics_json, "intrinsics"});
  std::ifstream pose_file{dir / "poses.txt"};
  if (!pose_file) {
    throw ConfigError("cannot open '" + (dir / "poses.txt").string() + "'");
  }
  const auto poses = read_tum(pose_file, (dir / "poses.txt").string());
  if (poses.empty()) {
    throw ConfigError("dataset '" + dir.string() + "' has no poses");
  }
  PosedImageSet set;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    RgbImage image = read_file(dir / view_image_name(i), read_ppm);
    if (image.width() != k.width() || image.height() != k.height()) {
      throw ConfigError(view_image_name(i) + ": image size does not match intrinsics");
    }
    set.views.push_back({poses[i].pose, k, std::move(image)});
  }
  set.split(heldout_every);
  return set;
}

}  // namespace nerfsim

#endif
