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

#ifndef NERFSIM_GEOMETRY_HPP
#define NERFSIM_GEOMETRY_HPP

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "nerfsim/errors.hpp"

/**
 * \file
 * \brief Rigid transforms, pinhole cameras and rays.
 *
 * Camera frames follow the image convention: +z forward, +x right, +y down.
 * The world and robot body frames are z-up.
 */

namespace nerfsim {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

inline bool all_finite(const Vec3& v) { return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z()); }

/// Rigid transform `target_from_source`: a unit quaternion rotation followed by a translation in meters.
class Pose {
 public:
  Pose() = default;

  /// Builds a pose, normalizing the rotation.
  /**
   * Throws std::invalid_argument if any component is non-finite or the quaternion is degenerate.
   */
  Pose(const Quat& rotation, const Vec3& translation) : rotation_{rotation}, translation_{translation} {
    const double norm = rotation_.norm();
    if (!std::isfinite(norm) || norm < 1e-12 || !all_finite(translation_)) {
      throw std::invalid_argument("Pose: rotation must be a finite non-zero quaternion and translation finite");
    }
    rotation_.coeffs() /= norm;
  }

  explicit Pose(const Vec3& translation) : Pose{Quat::Identity(), translation} {}

  static Pose identity() { return Pose{}; }

  /// Rotation about +z by `yaw` radians, then translation.
  static Pose from_yaw(double yaw, const Vec3& translation) {
    return Pose{Quat{Eigen::AngleAxisd{yaw, Vec3::UnitZ()}}, translation};
  }

  [[nodiscard]] const Quat& rotation() const { return rotation_; }
  [[nodiscard]] const Vec3& translation() const { return translation_; }

  [[nodiscard]] Vec3 apply(const Vec3& point) const { return rotation_ * point + translation_; }
  [[nodiscard]] Vec3 rotate(const Vec3& vector) const { return rotation_ * vector; }

  [[nodiscard]] Pose inverse() const {
    const Quat inv = rotation_.conjugate();
    return Pose{inv, -(inv * translation_)};
  }

  [[nodiscard]] Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation_.toRotationMatrix();
    m.topRightCorner<3, 1>() = translation_;
    return m;
  }

  /// Yaw angle (rotation about +z) of the pose's forward (+x) axis.
  [[nodiscard]] double yaw() const {
    const Vec3 forward = rotation_ * Vec3::UnitX();
    return std::atan2(forward.y(), forward.x());
  }

 private:
  Quat rotation_{Quat::Identity()};
  Vec3 translation_{Vec3::Zero()};
};

/// `compose(a, b).apply(p) == a.apply(b.apply(p))`.
inline Pose compose(const Pose& a, const Pose& b) {
  return Pose{a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation()};
}

inline Pose operator*(const Pose& a, const Pose& b) { return compose(a, b); }

/// Linear interpolation of translation and spherical-linear interpolation of rotation, s in [0, 1].
inline Pose interpolate(const Pose& a, const Pose& b, double s) {
  if (s <= 0.0) {
    return a;
  }
  if (s >= 1.0) {
    return b;
  }
  return Pose{a.rotation().slerp(s, b.rotation()), (1.0 - s) * a.translation() + s * b.translation()};
}

/// Pinhole intrinsics in pixels.
class CameraIntrinsics {
 public:
  CameraIntrinsics(double fx, double fy, double cx, double cy, int width, int height)
      : fx_{fx}, fy_{fy}, cx_{cx}, cy_{cy}, width_{width}, height_{height} {
    if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy) || !std::isfinite(cx) ||
        !std::isfinite(cy)) {
      throw std::invalid_argument("CameraIntrinsics: focal lengths must be positive and finite");
    }
    if (width < 1 || height < 1) {
      throw std::invalid_argument("CameraIntrinsics: image dimensions must be >= 1");
    }
  }

  /// Centered principal point and a horizontal field of view in degrees.
  static CameraIntrinsics from_fov(double hfov_deg, int width, int height) {
    const double f = 0.5 * width / std::tan(0.5 * hfov_deg * M_PI / 180.0);
    return CameraIntrinsics{f, f, 0.5 * width, 0.5 * height, width, height};
  }

  [[nodiscard]] double fx() const { return fx_; }
  [[nodiscard]] double fy() const { return fy_; }
  [[nodiscard]] double cx() const { return cx_; }
  [[nodiscard]] double cy() const { return cy_; }
  [[nodiscard]] int width() const { return width_; }
  [[nodiscard]] int height() const { return height_; }

  bool operator==(const CameraIntrinsics&) const = default;

 private:
  double fx_;
  double fy_;
  double cx_;
  double cy_;
  int width_;
  int height_;
};

/// Half-line segment `origin + t * direction`, t in [t_near, t_far].
struct Ray {
  Vec3 origin;
  Vec3 direction;
  double t_near;
  double t_far;

  Ray(const Vec3& o, const Vec3& d, double near, double far) : origin{o}, direction{d}, t_near{near}, t_far{far} {
    if (!all_finite(o) || !all_finite(d) || std::abs(d.norm() - 1.0) > 1e-9) {
      throw std::invalid_argument("Ray: origin must be finite and direction unit length");
    }
    if (!(near >= 0.0) || !(near < far) || !std::isfinite(far)) {
      throw std::invalid_argument("Ray: require 0 <= t_near < t_far < inf");
    }
  }

  [[nodiscard]] Vec3 at(double t) const { return origin + t * direction; }
};

/// Near/far clipping distances for camera rays, meters.
struct ClipRange {
  double near = 0.05;
  double far = 20.0;
};

struct Projection {
  double u = 0.0;
  double v = 0.0;
  double z = 0.0;
  /// False when the point is at or behind the camera plane.
  bool valid = false;
};

inline Projection project(const Vec3& point_cam, const CameraIntrinsics& k) {
  const double z = point_cam.z();
  if (!(z > 0.0)) {
    return Projection{0.0, 0.0, z, false};
  }
  return Projection{k.fx() * point_cam.x() / z + k.cx(), k.fy() * point_cam.y() / z + k.cy(), z, true};
}

/// Camera-frame unit direction through the center of pixel (u, v).
inline Vec3 pixel_direction_cam(int u, int v, const CameraIntrinsics& k) {
  if (u < 0 || v < 0 || u >= k.width() || v >= k.height()) {
    throw std::out_of_range("pixel (" + std::to_string(u) + ", " + std::to_string(v) + ") outside " +
                            std::to_string(k.width()) + "x" + std::to_string(k.height()) + " image");
  }
  const Vec3 d{(u + 0.5 - k.cx()) / k.fx(), (v + 0.5 - k.cy()) / k.fy(), 1.0};
  return d.normalized();
}

/// World-frame ray through the center of pixel (u, v) of a camera at `world_from_cam`.
inline Ray pixel_ray(int u, int v, const CameraIntrinsics& k, const Pose& world_from_cam, ClipRange clip = {}) {
  const Vec3 d = world_from_cam.rotate(pixel_direction_cam(u, v, k)).normalized();
  return Ray{world_from_cam.translation(), d, clip.near, clip.far};
}

struct StampedPose {
  double time;
  Pose pose;
};

/// Parses `timestamp tx ty tz qx qy qz qw` lines; blank lines and '#' comments are skipped.
inline std::vector<StampedPose> read_tum(std::istream& in, const std::string& source = "<stream>") {
  std::vector<StampedPose> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream fields{line};
    double values[8];
    int count = 0;
    double value = 0.0;
    while (count < 8 && fields >> value) {
      values[count++] = value;
    }
    if (count == 0 && fields.eof()) {
      continue;
    }
    std::string rest;
    if (count != 8 || (fields >> rest)) {
      throw ConfigError(source + ":" + std::to_string(line_no) +
                        ": expected 8 numbers 'timestamp tx ty tz qx qy qz qw'");
    }
    try {
      out.push_back({values[0], Pose{Quat{values[7], values[4], values[5], values[6]},
                                     Vec3{values[1], values[2], values[3]}}});
    } catch (const std::invalid_argument& e) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline void write_tum(std::ostream& out, const std::vector<StampedPose>& poses) {
  out << std::setprecision(17);
  for (const auto& [time, pose] : poses) {
    const auto& q = pose.rotation();
    const auto& t = pose.translation();
    out << time << ' ' << t.x() << ' ' << t.y() << ' ' << t.z() << ' ' << q.x() << ' ' << q.y() << ' ' << q.z()
        << ' ' << q.w() << '\n';
  }
}

/// Rotation taking camera axes (x right, y down, z forward) to a z-up body frame looking along body +x.
inline Quat body_from_camera_axes() {
  Eigen::Matrix3d m;
  // columns: camera x, y, z expressed in body coordinates
  m.col(0) = -Vec3::UnitY();
  m.col(1) = -Vec3::UnitZ();
  m.col(2) = Vec3::UnitX();
  return Quat{m};
}

/// Camera pose at `eye` looking at `target` with world +z up.
inline Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& up = Vec3::UnitZ()) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 right = forward.cross(up);
  if (right.norm() < 1e-9) {
    right = forward.cross(Vec3::UnitY());
  }
  right.normalize();
  const Vec3 down = forward.cross(right);
  Eigen::Matrix3d m;
  m.col(0) = right;
  m.col(1) = down;
  m.col(2) = forward;
  return Pose{Quat{m}, eye};
}

}  // namespace nerfsim

#endif
