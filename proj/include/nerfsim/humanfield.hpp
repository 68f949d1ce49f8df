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

#ifndef NERFSIM_HUMANFIELD_HPP
#define NERFSIM_HUMANFIELD_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "nerfsim/config.hpp"
#include "nerfsim/errors.hpp"
#include "nerfsim/field.hpp"
#include "nerfsim/geometry.hpp"

/**
 * \file
 * \brief Articulated capsule humans evaluated as radiance fields.
 *
 * The human frame is z-up with +x facing forward and its origin on the ground between the feet.
 * Bones form a tree (parents listed before children). A bone's pose in the human frame is
 * `human_from_parent * bind * keyframe(phase)`, and its capsule is given in bone coordinates.
 */

namespace nerfsim {

/// Cyclic sequence of per-bone local transforms.
/**
 * Keyframes are spread evenly over the cycle including both ends: with K keyframes, keyframe k
 * sits at phase k / (K - 1). A gait whose last keyframe repeats the first is periodic.
 */
struct GaitCycle {
  std::vector<std::string> bones;
  /// keyframes[k][b] is the local transform of bones[b] in keyframe k.
  std::vector<std::vector<Pose>> keyframes;
  /// Meters travelled per cycle.
  double cycle_length = 1.4;

  void validate() const {
    if (keyframes.size() < 2) {
      throw std::invalid_argument("GaitCycle: need at least 2 keyframes");
    }
    for (const auto& kf : keyframes) {
      if (kf.size() != bones.size()) {
        throw std::invalid_argument("GaitCycle: every keyframe must list every bone");
      }
    }
    if (!(cycle_length > 0.0) || !std::isfinite(cycle_length)) {
      throw std::invalid_argument("GaitCycle: cycle_length must be positive");
    }
  }

  /// Local transforms at `phase` (wrapped into [0, 1)), interpolated between the bracketing keyframes.
  [[nodiscard]] std::vector<Pose> sample(double phase) const {
    double p = phase - std::floor(phase);
    if (p >= 1.0) {
      p = 0.0;
    }
    const double x = p * static_cast<double>(keyframes.size() - 1);
    const auto k = std::min(static_cast<std::size_t>(x), keyframes.size() - 2);
    const double s = x - static_cast<double>(k);
    std::vector<Pose> out(bones.size());
    for (std::size_t b = 0; b < bones.size(); ++b) {
      out[b] = interpolate(keyframes[k][b], keyframes[k + 1][b], s);
    }
    return out;
  }
};

struct Capsule {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  double radius = 0.0;
};

inline double distance_to_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double s = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + s * ab)).norm();
}

struct Bone {
  std::string name;
  /// Index of the parent bone, or -1 for the root.
  int parent = -1;
  Pose bind;
  Capsule capsule;
  Vec3 color = Vec3::Constant(0.5);
  double density = 50.0;
};

/// Capsule skeleton plus the gait that animates it and a local bbox enclosing every gait pose.
class CapsuleHuman {
 public:
  /// Sampled phases per keyframe interval when fitting or checking the bbox.
  static constexpr int kBoundsSamples = 64;

  CapsuleHuman() = default;

  /// Validates the skeleton and gait. Computes the bbox when `bbox` is empty, else checks it encloses every pose.
  CapsuleHuman(std::vector<Bone> bones, GaitCycle gait, Aabb bbox = Aabb::empty())
      : bones_{std::move(bones)}, gait_{std::move(gait)} {
    if (bones_.empty()) {
      throw std::invalid_argument("CapsuleHuman: no bones");
    }
    gait_.validate();
    gait_index_.assign(bones_.size(), -1);
    for (std::size_t i = 0; i < bones_.size(); ++i) {
      const Bone& b = bones_[i];
      if (b.parent >= static_cast<int>(i)) {
        throw std::invalid_argument("CapsuleHuman: bone '" + b.name + "' must come after its parent");
      }
      if (!(b.density > 0.0) || !(b.capsule.radius > 0.0)) {
        throw std::invalid_argument("CapsuleHuman: bone '" + b.name + "' needs positive density and radius");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (bones_[j].name == b.name) {
          throw std::invalid_argument("CapsuleHuman: duplicate bone '" + b.name + "'");
        }
      }
    }
    for (std::size_t g = 0; g < gait_.bones.size(); ++g) {
      const auto it = std::find_if(bones_.begin(), bones_.end(),
                                   [&](const Bone& b) { return b.name == gait_.bones[g]; });
      if (it == bones_.end()) {
        throw std::invalid_argument("CapsuleHuman: gait animates unknown bone '" + gait_.bones[g] + "'");
      }
      gait_index_[static_cast<std::size_t>(it - bones_.begin())] = static_cast<int>(g);
    }
    const Aabb swept = swept_bounds();
    if (bbox.is_empty()) {
      const Vec3 margin = Vec3::Constant(0.01) + 0.02 * (swept.max - swept.min);
      bbox_ = Aabb{swept.min - margin, swept.max + margin};
    } else {
      if (!bbox.contains(swept)) {
        throw std::invalid_argument("CapsuleHuman: bbox does not enclose the body over the whole gait cycle");
      }
      bbox_ = bbox;
    }
  }

  [[nodiscard]] const std::vector<Bone>& bones() const { return bones_; }
  [[nodiscard]] const GaitCycle& gait() const { return gait_; }
  [[nodiscard]] const Aabb& bbox() const { return bbox_; }

  /// human_from_bone for every bone at `phase`.
  [[nodiscard]] std::vector<Pose> bone_poses(double phase) const {
    const std::vector<Pose> local = gait_.sample(phase);
    std::vector<Pose> out(bones_.size());
    for (std::size_t i = 0; i < bones_.size(); ++i) {
      const Bone& b = bones_[i];
      Pose p = b.bind;
      if (gait_index_[i] >= 0) {
        p = p * local[static_cast<std::size_t>(gait_index_[i])];
      }
      out[i] = b.parent >= 0 ? out[static_cast<std::size_t>(b.parent)] * p : p;
    }
    return out;
  }

  /// Capsules in the human frame at `phase`.
  [[nodiscard]] std::vector<Capsule> posed_capsules(double phase) const {
    const auto poses = bone_poses(phase);
    std::vector<Capsule> out(bones_.size());
    for (std::size_t i = 0; i < bones_.size(); ++i) {
      out[i] = Capsule{poses[i].apply(bones_[i].capsule.a), poses[i].apply(bones_[i].capsule.b),
                       bones_[i].capsule.radius};
    }
    return out;
  }

  /// Union of capsule bounds over every keyframe and kBoundsSamples phases per keyframe interval.
  [[nodiscard]] Aabb swept_bounds() const {
    Aabb box = Aabb::empty();
    const auto intervals = static_cast<int>(gait_.keyframes.size() - 1);
    const int steps = intervals * kBoundsSamples;
    for (int s = 0; s <= steps; ++s) {
      // s == steps evaluates the final keyframe, which sample() would wrap to phase 0
      const auto capsules = s == steps ? final_keyframe_capsules() : posed_capsules(static_cast<double>(s) / steps);
      for (const auto& c : capsules) {
        const Vec3 r = Vec3::Constant(c.radius);
        box.expand(c.a - r);
        box.expand(c.a + r);
        box.expand(c.b - r);
        box.expand(c.b + r);
      }
    }
    return box;
  }

 private:
  [[nodiscard]] std::vector<Capsule> final_keyframe_capsules() const {
    std::vector<Pose> poses(bones_.size());
    for (std::size_t i = 0; i < bones_.size(); ++i) {
      Pose p = bones_[i].bind;
      if (gait_index_[i] >= 0) {
        p = p * gait_.keyframes.back()[static_cast<std::size_t>(gait_index_[i])];
      }
      poses[i] = bones_[i].parent >= 0 ? poses[static_cast<std::size_t>(bones_[i].parent)] * p : p;
    }
    std::vector<Capsule> out(bones_.size());
    for (std::size_t i = 0; i < bones_.size(); ++i) {
      out[i] = Capsule{poses[i].apply(bones_[i].capsule.a), poses[i].apply(bones_[i].capsule.b),
                       bones_[i].capsule.radius};
    }
    return out;
  }

  std::vector<Bone> bones_;
  GaitCycle gait_;
  std::vector<int> gait_index_;
  Aabb bbox_;
};

/// A human placed in the world at a gait phase. Immutable; safe to evaluate concurrently.
class PosedHuman {
 public:
  PosedHuman(std::shared_ptr<const CapsuleHuman> human, const Pose& world_from_human, double gait_phase)
      : human_{std::move(human)},
        world_from_human_{world_from_human},
        human_from_world_{world_from_human.inverse()},
        gait_phase_{gait_phase} {
    if (!human_) {
      throw std::invalid_argument("PosedHuman: null human");
    }
    if (world_from_human.translation().z() != 0.0) {
      throw std::invalid_argument("PosedHuman: humans stand on the ground plane (z = 0)");
    }
    capsules_ = human_->posed_capsules(gait_phase);
  }

  /// Upright human at ground position (x, y) facing `heading`.
  static PosedHuman on_ground(std::shared_ptr<const CapsuleHuman> human, const Vec2& position, double heading,
                              double gait_phase) {
    return PosedHuman{std::move(human), Pose::from_yaw(heading, Vec3{position.x(), position.y(), 0.0}),
                      gait_phase};
  }

  [[nodiscard]] const CapsuleHuman& human() const { return *human_; }
  [[nodiscard]] const Pose& world_from_human() const { return world_from_human_; }
  [[nodiscard]] double gait_phase() const { return gait_phase_; }
  [[nodiscard]] const std::vector<Capsule>& capsules() const { return capsules_; }

  /// Density and color of the capsule whose axis is nearest to x; zero outside every capsule or the bbox.
  RadianceSample eval(const Vec3& x_world, const Vec3& /*dir*/) const {
    const Vec3 x = human_from_world_.apply(x_world);
    if (!human_->bbox().contains(x)) {
      return {};
    }
    RadianceSample out;
    double best_distance = std::numeric_limits<double>::infinity();
    const auto& bones = human_->bones();
    for (std::size_t i = 0; i < capsules_.size(); ++i) {
      const double d = distance_to_segment(x, capsules_[i].a, capsules_[i].b);
      if (d >= capsules_[i].radius) {
        continue;
      }
      if (d < best_distance) {
        out = RadianceSample{bones[i].color, bones[i].density};
        best_distance = d;
      }
    }
    return out;
  }

 private:
  std::shared_ptr<const CapsuleHuman> human_;
  Pose world_from_human_;
  Pose human_from_world_;
  double gait_phase_ = 0.0;
  std::vector<Capsule> capsules_;
};

inline RadianceSample eval_human(const PosedHuman& posed, const Vec3& x_world, const Vec3& dir) {
  return posed.eval(x_world, dir);
}

/// The local bbox's 8 corners in world coordinates.
inline std::array<Vec3, 8> human_bbox_world(const PosedHuman& posed) {
  auto corners = posed.human().bbox().corners();
  for (auto& c : corners) {
    c = posed.world_from_human().apply(c);
  }
  return corners;
}

namespace detail {
/// `{"translation": [x, y, z], "rotation": [qx, qy, qz, qw]}`, both optional.
inline Pose parse_transform(const ConfigNode& node) {
  const Vec3 t = node.has("translation") ? node.vec3("translation") : Vec3::Zero();
  if (!node.has("rotation")) {
    return Pose{t};
  }
  const auto q = node.vector<4>("rotation");
  try {
    return Pose{Quat{q[3], q[0], q[1], q[2]}, t};
  } catch (const std::invalid_argument& e) {
    node.fail("rotation", e.what());
  }
}

inline Json transform_to_json(const Pose& p) {
  const Quat& q = p.rotation();
  return Json{{"translation", to_json(p.translation())}, {"rotation", Json::array({q.x(), q.y(), q.z(), q.w()})}};
}
}  // namespace detail

/// Gait file: `{"cycle_length": 1.4, "bones": [names], "keyframes": [[{"translation", "rotation"}, ...], ...]}`.
inline GaitCycle parse_gait(const Json& json) {
  const ConfigNode root{json, ""};
  GaitCycle gait;
  gait.cycle_length = root.positive("cycle_length");
  const Json& names = root.array("bones");
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!names[i].is_string()) {
      root.fail("bones", "entry " + std::to_string(i) + " must be a bone name");
    }
    gait.bones.push_back(names[i].get<std::string>());
  }
  const Json& frames = root.array("keyframes");
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const std::string where = "keyframes[" + std::to_string(k) + "]";
    if (!frames[k].is_array() || frames[k].size() != gait.bones.size()) {
      root.fail(where, "expected one transform per bone (" + std::to_string(gait.bones.size()) + ")");
    }
    std::vector<Pose> kf;
    for (std::size_t b = 0; b < frames[k].size(); ++b) {
      kf.push_back(detail::parse_transform(ConfigNode{frames[k][b], where + "[" + std::to_string(b) + "]"}));
    }
    gait.keyframes.push_back(std::move(kf));
  }
  if (gait.keyframes.size() < 2) {
    root.fail("keyframes", "need at least 2 keyframes");
  }
  return gait;
}

inline Json gait_to_json(const GaitCycle& gait) {
  Json frames = Json::array();
  for (const auto& kf : gait.keyframes) {
    Json row = Json::array();
    for (const auto& p : kf) {
      row.push_back(detail::transform_to_json(p));
    }
    frames.push_back(row);
  }
  return Json{{"cycle_length", gait.cycle_length}, {"bones", gait.bones}, {"keyframes", frames}};
}

/// Human file: bones with parent name, bind transform, capsule, color and density, plus a gait file path.
/**
 * `{"gait": "walk.json", "bbox": {"min", "max"} (optional), "bones": [{"name", "parent", "bind":
 * {...}, "capsule": {"a", "b", "radius"}, "color", "density"}]}`. The gait path is resolved
 * relative to `source`.
 */
inline CapsuleHuman load_human(const std::filesystem::path& source) {
  const Json json = load_json(source);
  const ConfigNode root{json, ""};
  std::vector<Bone> bones;
  for (const auto& node : root.objects("bones")) {
    Bone b;
    b.name = node.string("name");
    if (node.has("parent")) {
      const std::string parent = node.string("parent");
      const auto it = std::find_if(bones.begin(), bones.end(), [&](const Bone& x) { return x.name == parent; });
      if (it == bones.end()) {
        node.fail("parent", "unknown or later-listed bone '" + parent + "'");
      }
      b.parent = static_cast<int>(it - bones.begin());
    }
    if (node.has("bind")) {
      b.bind = detail::parse_transform(node.child("bind"));
    }
    const ConfigNode capsule = node.child("capsule");
    b.capsule = Capsule{capsule.vec3("a"), capsule.vec3("b"), capsule.positive("radius")};
    b.color = node.color("color");
    b.density = node.positive("density");
    bones.push_back(std::move(b));
  }
  if (bones.empty()) {
    root.fail("bones", "at least one bone is required");
  }
  const GaitCycle gait = parse_gait(load_json(resolve_path(source, root.string("gait"))));
  Aabb bbox = Aabb::empty();
  if (root.has("bbox")) {
    const ConfigNode node = root.child("bbox");
    bbox = Aabb{node.vec3("min"), node.vec3("max")};
  }
  try {
    return CapsuleHuman{std::move(bones), gait, bbox};
  } catch (const std::invalid_argument& e) {
    throw ConfigError(source.string() + ": " + e.what());
  }
}

}  // namespace nerfsim

#endif
