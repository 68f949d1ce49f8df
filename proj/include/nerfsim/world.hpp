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

#ifndef NERFSIM_WORLD_HPP
#define NERFSIM_WORLD_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "nerfsim/config.hpp"
#include "nerfsim/crowd.hpp"
#include "nerfsim/dataset.hpp"
#include "nerfsim/field.hpp"
#include "nerfsim/geometry.hpp"
#include "nerfsim/humanfield.hpp"
#include "nerfsim/image.hpp"
#include "nerfsim/render.hpp"
#include "nerfsim/trajectory.hpp"

/**
 * \file
 * \brief Scene, crowd and robot in one world frame: stepping, visibility culling and sensor capture.
 */

namespace nerfsim {

struct CameraSensor {
  std::string name;
  CameraIntrinsics intrinsics;
  /// body_from_camera, camera axes x right, y down, z forward.
  Pose mount;
  ClipRange clip;
  /// Capture on frames whose index is a multiple of this.
  int every = 1;
};

struct LidarSensor {
  std::string name;
  LidarSpec spec;
  /// body_from_sensor, sensor z up.
  Pose mount;
  int every = 1;
};

struct SensorRig {
  std::vector<CameraSensor> cameras;
  std::vector<CameraSensor> depth_cameras;
  std::vector<LidarSensor> lidars;
  /// Radius of the disc pedestrians avoid.
  double robot_radius = 0.5;

  [[nodiscard]] std::vector<std::string> sensor_names() const {
    std::vector<std::string> out;
    for (const auto& c : cameras) {
      out.push_back(c.name);
    }
    for (const auto& c : depth_cameras) {
      out.push_back(c.name);
    }
    for (const auto& l : lidars) {
      out.push_back(l.name);
    }
    return out;
  }

  void validate() const {
    const auto names = sensor_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i].empty()) {
        throw std::invalid_argument("SensorRig: empty sensor name");
      }
      if (std::find(names.begin(), names.begin() + static_cast<std::ptrdiff_t>(i), names[i]) !=
          names.begin() + static_cast<std::ptrdiff_t>(i)) {
        throw std::invalid_argument("SensorRig: duplicate sensor name '" + names[i] + "'");
      }
    }
    if (!(robot_radius > 0.0)) {
      throw std::invalid_argument("SensorRig: robot_radius must be positive");
    }
  }
};

/// Body-frame mount from `position`, `yaw_deg` (left positive) and `pitch_deg` (down positive).
inline Pose mount_from_json(const ConfigNode& node, bool optical) {
  const double yaw = node.number("yaw_deg", 0.0) * M_PI / 180.0;
  const double pitch = node.number("pitch_deg", 0.0) * M_PI / 180.0;
  const Quat r = Quat{Eigen::AngleAxisd{yaw, Vec3::UnitZ()}} * Quat{Eigen::AngleAxisd{pitch, Vec3::UnitY()}};
  return Pose{optical ? Quat{r * body_from_camera_axes()} : r, node.vec3("position")};
}

namespace detail {
inline int capture_every(const ConfigNode& node) {
  const auto every = node.integer("every", 1);
  if (every < 1) {
    node.fail("every", "must be >= 1");
  }
  return static_cast<int>(every);
}

inline CameraSensor parse_camera(const ConfigNode& node) {
  CameraSensor c{node.string("name"), intrinsics_from_json(node), mount_from_json(node, true), ClipRange{},
                 capture_every(node)};
  c.clip.near = node.non_negative("near", c.clip.near);
  c.clip.far = node.positive("far", c.clip.far);
  if (!(c.clip.near < c.clip.far)) {
    node.fail("far", "must exceed near");
  }
  return c;
}
}  // namespace detail

/// Parses a rig description.
/**
 * `{"robot_radius": 0.5, "cameras": [...], "depth_cameras": [...], "lidars": [...]}`. Cameras take
 * `name, width, height, hfov_deg | fx fy cx cy, position, yaw_deg, pitch_deg, near, far, every`;
 * lidars take `name, position, yaw_deg` plus the LidarSpec field names.
 */
inline SensorRig parse_rig(const Json& json) {
  const ConfigNode root{json, ""};
  SensorRig rig;
  rig.robot_radius = root.positive("robot_radius", rig.robot_radius);
  for (const auto& node : root.objects("cameras")) {
    rig.cameras.push_back(detail::parse_camera(node));
  }
  for (const auto& node : root.objects("depth_cameras")) {
    rig.depth_cameras.push_back(detail::parse_camera(node));
  }
  for (const auto& node : root.objects("lidars")) {
    LidarSpec spec;
    spec.channels = static_cast<int>(node.integer("channels", spec.channels));
    spec.vfov_min_deg = node.number("vfov_min_deg", spec.vfov_min_deg);
    spec.vfov_max_deg = node.number("vfov_max_deg", spec.vfov_max_deg);
    spec.azimuth_count = static_cast<int>(node.integer("azimuth_count", spec.azimuth_count));
    spec.min_range = node.non_negative("min_range", spec.min_range);
    spec.max_range = node.positive("max_range", spec.max_range);
    spec.opacity_threshold = node.non_negative("opacity_threshold", spec.opacity_threshold);
    try {
      spec.validate();
    } catch (const std::invalid_argument& e) {
      node.fail("", e.what());
    }
    rig.lidars.push_back(LidarSensor{node.string("name"), spec, mount_from_json(node, false),
                                     detail::capture_every(node)});
  }
  try {
    rig.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("rig: ") + e.what());
  }
  return rig;
}

/// Conservative test of whether a human's bbox can cover any pixel of the camera.
/**
 * The bbox is clipped against the plane Z = 1e-9 in front of the camera; the projections of the
 * remaining corners and of the edge/plane crossings span a rectangle that contains the image of
 * every bbox point in front of the camera. Visible when that rectangle, grown by half a pixel,
 * overlaps the image. Not visible when the whole box is behind the camera.
 */
inline bool visible(const PosedHuman& posed, const CameraIntrinsics& k, const Pose& world_from_cam) {
  constexpr double kMinDepth = 1e-9;
  constexpr double kMargin = 0.5;
  const Pose cam_from_world = world_from_cam.inverse();
  const auto world = human_bbox_world(posed);
  std::array<Vec3, 8> cam;
  for (std::size_t i = 0; i < 8; ++i) {
    cam[i] = cam_from_world.apply(world[i]);
  }
  double u_min = std::numeric_limits<double>::infinity();
  double v_min = u_min;
  double u_max = -u_min;
  double v_max = -u_min;
  bool any = false;
  const auto include = [&](const Vec3& p) {
    const double u = k.fx() * p.x() / p.z() + k.cx();
    const double v = k.fy() * p.y() / p.z() + k.cy();
    u_min = std::min(u_min, u);
    u_max = std::max(u_max, u);
    v_min = std::min(v_min, v);
    v_max = std::max(v_max, v);
    any = true;
  };
  for (const auto& p : cam) {
    if (p.z() >= kMinDepth) {
      include(p);
    }
  }
  // edges join corners differing in exactly one index bit
  for (int i = 0; i < 8; ++i) {
    for (int bit = 1; bit < 8; bit <<= 1) {
      const int j = i | bit;
      if (j == i) {
        continue;
      }
      const Vec3& a = cam[static_cast<std::size_t>(i)];
      const Vec3& b = cam[static_cast<std::size_t>(j)];
      if ((a.z() < kMinDepth) != (b.z() < kMinDepth)) {
        const double s = (kMinDepth - a.z()) / (b.z() - a.z());
        Vec3 p = a + s * (b - a);
        p.z() = kMinDepth;
        include(p);
      }
    }
  }
  if (!any) {
    return false;
  }
  return u_max + kMargin >= 0.0 && u_min - kMargin <= k.width() && v_max + kMargin >= 0.0 &&
         v_min - kMargin <= k.height();
}

/// Whether any point of the human's bbox lies within `range` of `center`.
inline bool within_range(const PosedHuman& posed, const Vec3& center, double range) {
  const Vec3 local = posed.world_from_human().inverse().apply(center);
  const Aabb& box = posed.human().bbox();
  const Vec3 closest = local.cwiseMax(box.min).cwiseMin(box.max);
  return (closest - local).norm() <= range;
}

/// Scene plus posed humans: densities add, colors blend weighted by density.
/**
 * Only contributors with positive density take part; a single contributor is returned unchanged and
 * zero total density yields black.
 */
template <RadianceField Scene>
RadianceSample composite_world(const Vec3& x, const Vec3& dir, const Scene& scene,
                               std::span<const PosedHuman* const> active_humans) {
  const RadianceSample base = scene.eval(x, dir);
  if (active_humans.empty()) {
    return base;
  }
  RadianceSample out;
  Vec3 weighted = Vec3::Zero();
  int contributors = 0;
  const auto add = [&](const RadianceSample& s) {
    if (!(s.density > 0.0)) {
      return;
    }
    if (contributors++ == 0) {
      out = s;
    } else {
      out.density += s.density;
    }
    weighted += s.density * s.color;
  };
  add(base);
  for (const PosedHuman* h : active_humans) {
    add(h->eval(x, dir));
  }
  if (contributors > 1) {
    out.color = (weighted / out.density).cwiseMax(0.0).cwiseMin(1.0);
  }
  return out;
}

/// A radiance field view of the scene with a subset of humans.
template <RadianceField Scene>
struct WorldField {
  const Scene* scene;
  std::vector<const PosedHuman*> humans;

  RadianceSample eval(const Vec3& x, const Vec3& dir) const {
    return composite_world(x, dir, *scene, std::span<const PosedHuman* const>{humans});
  }
};

/// Everything that stays fixed while the world runs.
struct WorldSetup {
  std::shared_ptr<const CapsuleHuman> human;
  std::vector<Segment> obstacles;
  Trajectory trajectory;
  double robot_radius = 0.5;
};

struct WorldState {
  double time = 0.0;
  std::vector<Agent> agents;
  /// One per agent, same order.
  std::vector<PosedHuman> humans;
  /// world_from_body.
  Pose robot;
  /// Time has reached or passed the end of the trajectory.
  bool trajectory_complete = false;
};

namespace detail {
inline std::vector<PosedHuman> pose_humans(const WorldSetup& setup, std::span<const Agent> agents) {
  std::vector<PosedHuman> out;
  out.reserve(agents.size());
  for (const auto& a : agents) {
    out.push_back(PosedHuman::on_ground(setup.human, a.position, a.heading, a.gait_phase));
  }
  return out;
}

inline Pose robot_pose(const WorldSetup& setup, double t, bool& complete) {
  if (setup.trajectory.empty()) {
    complete = true;
    return Pose::identity();
  }
  complete = t >= setup.trajectory.end_time();
  return setup.trajectory.pose_at(t);
}
}  // namespace detail

/// State at the trajectory's start time; agents take their gait cycle length from the human model.
inline WorldState initial_state(const WorldSetup& setup, std::vector<Agent> agents) {
  if (!setup.human && !agents.empty()) {
    throw std::invalid_argument("initial_state: agents need a human model");
  }
  WorldState state;
  state.time = setup.trajectory.empty() ? 0.0 : setup.trajectory.start_time();
  for (auto& a : agents) {
    a.gait_cycle_length = setup.human->gait().cycle_length;
  }
  state.agents = std::move(agents);
  state.humans = detail::pose_humans(setup, state.agents);
  state.robot = detail::robot_pose(setup, state.time, state.trajectory_complete);
  return state;
}

/// Advances the clock: robot first (interpolated along the trajectory), then the crowd, then re-poses humans.
inline WorldState step(const WorldState& state, const WorldSetup& setup, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("step: dt must be positive");
  }
  WorldState next;
  next.time = state.time + dt;
  next.robot = detail::robot_pose(setup, next.time, next.trajectory_complete);
  const Vec3& r = next.robot.translation();
  next.agents = step_crowd(state.agents, RobotDisc{Vec2{r.x(), r.y()}, setup.robot_radius}, setup.obstacles, dt);
  next.humans = detail::pose_humans(setup, next.agents);
  return next;
}

enum class SensorKind { kCamera, kDepth, kLidar };

inline const char* sensor_extension(SensorKind kind) {
  switch (kind) {
    case SensorKind::kCamera:
      return "ppm";
    case SensorKind::kDepth:
      return "pfm";
    case SensorKind::kLidar:
      return "ply";
  }
  return "";
}

struct SensorOutput {
  std::string sensor;
  SensorKind kind = SensorKind::kCamera;
  std::variant<RgbImage, DepthImage, PointCloud> data;
  /// Humans rendered for this sensor after culling.
  std::size_t active_humans = 0;
};

struct CaptureOptions {
  RaySampling sampling{128, SamplingStrategy::kUniform, 0};
  /// Skip humans that cannot appear in a sensor; disabling renders every human everywhere.
  bool culling = true;
};

/// Renders every sensor due on `frame`, in rig order: cameras, depth cameras, lidars.
template <RadianceField Scene>
std::vector<SensorOutput> capture(const Scene& scene, const WorldState& state, const SensorRig& rig,
                                  std::size_t frame, const CaptureOptions& options = {}) {
  std::vector<SensorOutput> out;
  const auto due = [&](int every) { return frame % static_cast<std::size_t>(every) == 0; };
  const auto camera_field = [&](const CameraSensor& c, const Pose& world_from_cam) {
    WorldField<Scene> field{&scene, {}};
    for (const auto& h : state.humans) {
      if (!options.culling || visible(h, c.intrinsics, world_from_cam)) {
        field.humans.push_back(&h);
      }
    }
    return field;
  };
  for (const auto& c : rig.cameras) {
    if (due(c.every)) {
      const Pose world_from_cam = state.robot * c.mount;
      const auto field = camera_field(c, world_from_cam);
      out.push_back({c.name, SensorKind::kCamera,
                     render_camera(c.intrinsics, world_from_cam, field, options.sampling, c.clip),
                     field.humans.size()});
    }
  }
  for (const auto& c : rig.depth_cameras) {
    if (due(c.every)) {
      const Pose world_from_cam = state.robot * c.mount;
      const auto field = camera_field(c, world_from_cam);
      out.push_back({c.name, SensorKind::kDepth,
                     render_depth(c.intrinsics, world_from_cam, field, options.sampling, c.clip),
                     field.humans.size()});
    }
  }
  for (const auto& l : rig.lidars) {
    if (due(l.every)) {
      const Pose world_from_sensor = state.robot * l.mount;
      WorldField<Scene> field{&scene, {}};
      for (const auto& h : state.humans) {
        if (!options.culling || within_range(h, world_from_sensor.translation(), l.spec.max_range)) {
          field.humans.push_back(&h);
        }
      }
      out.push_back({l.name, SensorKind::kLidar, render_lidar(l.spec, world_from_sensor, field, options.sampling),
                     field.humans.size()});
    }
  }
  return out;
}

}  // namespace nerfsim

#endif
