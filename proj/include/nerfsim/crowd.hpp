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

#ifndef NERFSIM_CROWD_HPP
#define NERFSIM_CROWD_HPP

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nerfsim/config.hpp"
#include "nerfsim/errors.hpp"
#include "nerfsim/geometry.hpp"

/**
 * \file
 * \brief Social-force pedestrian dynamics on the ground plane.
 *
 * Each agent relaxes toward its desired velocity (speed v0 toward the current waypoint) with time
 * constant tau, and is pushed away from other agents, obstacle segments and the robot by isotropic
 * exponential repulsions A * exp((r_i + r_j - d) / B).
 */

namespace nerfsim {

/// Exponential repulsion constants: strength A in m/s^2, range B in meters.
struct Repulsion {
  double strength = 2.1;
  double range = 0.3;
};

/// Named parameter set ("emotional state") for an agent.
struct BehaviorProfile {
  std::string name = "calm";
  double desired_speed = 1.4;
  double relaxation_time = 0.5;
  double body_radius = 0.3;
  Repulsion pedestrian{2.1, 0.3};
  Repulsion obstacle{10.0, 0.2};
  Repulsion robot{2.1, 0.3};

  void validate() const {
    const double values[] = {desired_speed,      relaxation_time, body_radius,     pedestrian.strength,
                             pedestrian.range,   obstacle.strength, obstacle.range, robot.strength,
                             robot.range};
    for (double v : values) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument("BehaviorProfile '" + name + "': all parameters must be positive and finite");
      }
    }
  }

  /// Maximum speed after the post-integration clamp.
  [[nodiscard]] double max_speed() const { return 1.3 * desired_speed; }
};

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"calm", "scared", "ignoring"};
  return names;
}

/// Built-in profiles: "calm" (literature defaults), "scared" (robot strength doubled), "ignoring" (weak robot term).
inline BehaviorProfile preset(const std::string& name) {
  BehaviorProfile p;
  p.name = name;
  if (name == "calm") {
    return p;
  }
  if (name == "scared") {
    p.robot.strength *= 2.0;
    return p;
  }
  if (name == "ignoring") {
    p.robot.strength = 0.1;
    return p;
  }
  throw ConfigError("unknown behavior preset '" + name + "' (expected calm, scared or ignoring)");
}

struct Agent {
  int id = 0;
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  std::deque<Vec2> waypoints;
  double arrival_radius = 0.3;
  /// Re-queue each reached waypoint at the back.
  bool patrol = false;
  BehaviorProfile profile;
  /// Fraction of the current gait cycle, [0, 1).
  double gait_phase = 0.0;
  /// Meters travelled per gait cycle.
  double gait_cycle_length = 1.4;
  /// Facing direction in radians, world frame.
  double heading = 0.0;
};

struct Segment {
  Vec2 a;
  Vec2 b;

  [[nodiscard]] Vec2 closest_point(const Vec2& p) const {
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 == 0.0) {
      return a;
    }
    return a + std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) * ab;
  }
};

/// The robot as seen by pedestrians: a repulsive disc.
struct RobotDisc {
  Vec2 position;
  double radius = 0.5;
};

/// Goal-seeking term (v0 * e_goal - v) / tau. Zero when the agent has no waypoint.
inline Vec2 driving_force(const Agent& agent) {
  if (agent.waypoints.empty()) {
    return Vec2::Zero();
  }
  const Vec2 to_goal = agent.waypoints.front() - agent.position;
  const double dist = to_goal.norm();
  const Vec2 e = dist > 0.0 ? Vec2{to_goal / dist} : Vec2::Zero();
  return (agent.profile.desired_speed * e - agent.velocity) / agent.profile.relaxation_time;
}

struct RepulsionResult {
  Vec2 force = Vec2::Zero();
  /// Positions coincided; the force points along +x.
  bool coincident = false;
};

/// A * exp((r_self + r_other - d) / B) along the unit vector from other to self.
inline RepulsionResult repulsion_force(const Vec2& self_pos, double self_radius, const Vec2& other_pos,
                                       double other_radius, const Repulsion& constants) {
  const Vec2 diff = self_pos - other_pos;
  const double d = diff.norm();
  const double magnitude = constants.strength * std::exp((self_radius + other_radius - d) / constants.range);
  if (d == 0.0) {
    return {Vec2{magnitude, 0.0}, true};
  }
  return {magnitude * diff / d, false};
}

namespace detail {
[[noreturn]] inline void non_finite_agent(const Agent& a, const char* what) {
  throw RuntimeFailure(std::string("crowd: non-finite ") + what + " for agent " + std::to_string(a.id));
}
}  // namespace detail

/// Total social force on agent `index` given a snapshot of all agents.
inline Vec2 total_force(std::span<const Agent> agents, std::size_t index, const std::optional<RobotDisc>& robot,
                        std::span<const Segment> obstacles) {
  const Agent& self = agents[index];
  const BehaviorProfile& p = self.profile;
  // an agent with nowhere to go relaxes to rest
  Vec2 force = self.waypoints.empty() ? Vec2{-self.velocity / p.relaxation_time} : driving_force(self);
  for (std::size_t j = 0; j < agents.size(); ++j) {
    if (j != index) {
      force += repulsion_force(self.position, p.body_radius, agents[j].position, agents[j].profile.body_radius,
                               p.pedestrian)
                   .force;
    }
  }
  for (const auto& segment : obstacles) {
    force += repulsion_force(self.position, p.body_radius, segment.closest_point(self.position), 0.0, p.obstacle)
                 .force;
  }
  if (robot) {
    force += repulsion_force(self.position, p.body_radius, robot->position, robot->radius, p.robot).force;
  }
  return force;
}

/// Advances every agent by dt with semi-implicit Euler, using forces from the pre-step state.
/**
 * Per agent: v += F dt, clamp |v| to 1.3 v0, x += v dt; pop the current waypoint once within the
 * arrival radius (re-queued when patrolling); advance the gait phase by |v| dt / cycle length;
 * heading follows the velocity when |v| > 0.05 m/s.
 */
inline std::vector<Agent> step_crowd(std::span<const Agent> agents, const std::optional<RobotDisc>& robot,
                                     std::span<const Segment> obstacles, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("step_crowd: dt must be positive");
  }
  std::vector<Vec2> forces(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    forces[i] = total_force(agents, i, robot, obstacles);
    if (!std::isfinite(forces[i].x()) || !std::isfinite(forces[i].y())) {
      detail::non_finite_agent(agents[i], "force");
    }
  }
  std::vector<Agent> next(agents.begin(), agents.end());
  for (std::size_t i = 0; i < next.size(); ++i) {
    Agent& a = next[i];
    a.velocity += forces[i] * dt;
    const double speed = a.velocity.norm();
    const double cap = a.profile.max_speed();
    if (speed > cap) {
      a.velocity *= cap / speed;
    }
    a.position += a.velocity * dt;
    if (!a.waypoints.empty() && (a.waypoints.front() - a.position).norm() < a.arrival_radius) {
      const Vec2 reached = a.waypoints.front();
      a.waypoints.pop_front();
      if (a.patrol) {
        a.waypoints.push_back(reached);
      }
    }
    const double moved = a.velocity.norm();
    a.gait_phase = std::fmod(a.gait_phase + moved * dt / a.gait_cycle_length, 1.0);
    if (moved > 0.05) {
      a.heading = std::atan2(a.velocity.y(), a.velocity.x());
    }
    if (!std::isfinite(a.position.x()) || !std::isfinite(a.position.y()) || !std::isfinite(a.gait_phase)) {
      detail::non_finite_agent(a, "state");
    }
  }
  return next;
}

struct CrowdScenario {
  std::vector<Agent> agents;
  std::vector<Segment> obstacles;
};

namespace detail {
inline void apply_repulsion_override(const ConfigNode& node, const std::string& key, Repulsion& r) {
  if (node.has(key)) {
    const ConfigNode child = node.child(key);
    r.strength = child.positive("strength", r.strength);
    r.range = child.positive("range", r.range);
  }
}
}  // namespace detail

/// Parses a crowd scenario.
/**
 * `{"agents": [{"start": [x, y], "waypoints": [[x, y], ...], "preset": "calm", "patrol": false,
 *   "arrival_radius": 0.3, "heading": 0, "overrides": {"desired_speed": 1.2, "robot_repulsion":
 *   {"strength": 4, "range": 0.3}, ...}}], "obstacles": [{"a": [x, y], "b": [x, y]}]}`
 */
inline CrowdScenario parse_crowd_scenario(const Json& json) {
  const ConfigNode root{json, ""};
  CrowdScenario scenario;
  int next_id = 0;
  for (const auto& node : root.objects("agents")) {
    Agent a;
    a.id = static_cast<int>(node.integer("id", next_id));
    next_id = a.id + 1;
    a.position = node.vec2("start");
    a.heading = node.number("heading", 0.0);
    a.patrol = node.boolean("patrol", false);
    a.arrival_radius = node.positive("arrival_radius", 0.3);
    const Json& wps = node.array("waypoints");
    for (std::size_t i = 0; i < wps.size(); ++i) {
      if (!wps[i].is_array() || wps[i].size() != 2 || !wps[i][0].is_number() || !wps[i][1].is_number()) {
        node.fail("waypoints", "entry " + std::to_string(i) + " must be [x, y]");
      }
      a.waypoints.emplace_back(wps[i][0].get<double>(), wps[i][1].get<double>());
    }
    try {
      a.profile = preset(node.string("preset", "calm"));
    } catch (const ConfigError& e) {
      node.fail("preset", e.what());
    }
    if (node.has("overrides")) {
      const ConfigNode o = node.child("overrides");
      BehaviorProfile& p = a.profile;
      p.desired_speed = o.positive("desired_speed", p.desired_speed);
      p.relaxation_time = o.positive("relaxation_time", p.relaxation_time);
      p.body_radius = o.positive("body_radius", p.body_radius);
      detail::apply_repulsion_override(o, "pedestrian_repulsion", p.pedestrian);
      detail::apply_repulsion_override(o, "obstacle_repulsion", p.obstacle);
      detail::apply_repulsion_override(o, "robot_repulsion", p.robot);
    }
    scenario.agents.push_back(std::move(a));
  }
  for (std::size_t i = 0; i < scenario.agents.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (scenario.agents[i].id == scenario.agents[j].id) {
        throw ConfigError("agents[" + std::to_string(i) + "].id: duplicate agent id " +
                          std::to_string(scenario.agents[i].id));
      }
    }
  }
  for (const auto& node : root.objects("obstacles")) {
    scenario.obstacles.push_back(Segment{node.vec2("a"), node.vec2("b")});
  }
  return scenario;
}

}  // namespace nerfsim

#endif
