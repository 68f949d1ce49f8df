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

#include <cmath>
#include <optional>
#include <vector>

#include <gtest/gtest.h>

#include "nerfsim/crowd.hpp"
#include "scenarios.hpp"
#include "test_utils.hpp"

namespace {

using nerfsim::Agent;
using nerfsim::ConfigError;
using nerfsim::RobotDisc;
using nerfsim::Segment;
using nerfsim::Vec2;
using nerfsim::testing::make_agent;

Vec2 Rotate(const Vec2& v, double a) {
  return Vec2{std::cos(a) * v.x() - std::sin(a) * v.y(), std::sin(a) * v.x() + std::cos(a) * v.y()};
}

TEST(DrivingForce, AtRestTowardGoal) {
  const Agent a = make_agent(0, Vec2::Zero(), {Vec2{10.0, 0.0}});
  const Vec2 f = nerfsim::driving_force(a);
  EXPECT_DOUBLE_EQ(f.x(), 2.8);
  EXPECT_DOUBLE_EQ(f.y(), 0.0);
}

TEST(DrivingForce, ZeroAtDesiredVelocity) {
  Agent a = make_agent(0, Vec2::Zero(), {Vec2{0.0, 5.0}});
  a.velocity = Vec2{0.0, 1.4};
  EXPECT_NEAR(nerfsim::driving_force(a).norm(), 0.0, 1e-15);
}

TEST(DrivingForce, EmptyQueueIsZero) {
  Agent a = make_agent(0, Vec2::Zero(), {});
  a.velocity = Vec2{1.0, 0.5};
  EXPECT_EQ(nerfsim::driving_force(a), Vec2::Zero());
}

TEST(DrivingForce, RotationEquivariant) {
  nerfsim::testing::Gen gen{3};
  for (int i = 0; i < 50; ++i) {
    Agent a = make_agent(0, Vec2{gen.uniform(-3, 3), gen.uniform(-3, 3)}, {Vec2{gen.uniform(-9, 9), gen.uniform(-9, 9)}});
    a.velocity = Vec2{gen.uniform(-1, 1), gen.uniform(-1, 1)};
    const double angle = gen.uniform(-M_PI, M_PI);
    Agent r = a;
    r.position = Rotate(a.position, angle);
    r.velocity = Rotate(a.velocity, angle);
    r.waypoints.front() = Rotate(a.waypoints.front(), angle);
    const Vec2 expected = Rotate(nerfsim::driving_force(a), angle);
    EXPECT_NEAR((nerfsim::driving_force(r) - expected).norm(), 0.0, 1e-12);
  }
}

TEST(Repulsion, MagnitudeMatchesScalarEvaluation) {
  const auto r = nerfsim::repulsion_force(Vec2{1.0, 0.0}, 0.3, Vec2{0.0, 0.0}, 0.3, {2.1, 0.3});
  // 2.1 * e^(-4/3) written out as a power series independent of std::exp
  double series = 0.0;
  double term = 1.0;
  for (int n = 0; n < 40; ++n) {
    series += term;
    term *= (-4.0 / 3.0) / (n + 1);
  }
  EXPECT_NEAR(r.force.norm(), 2.1 * series, 1e-12);
  EXPECT_NEAR(r.force.norm(), 0.5535, 1e-4);
  EXPECT_GT(r.force.x(), 0.0);
  EXPECT_FALSE(r.coincident);
}

TEST(Repulsion, HeadOnForcesAreOpposite) {
  const Vec2 p{-1.2, 0.4};
  const Vec2 q{0.7, -0.3};
  const auto f = nerfsim::repulsion_force(p, 0.3, q, 0.3, {2.1, 0.3}).force;
  const auto g = nerfsim::repulsion_force(q, 0.3, p, 0.3, {2.1, 0.3}).force;
  EXPECT_EQ(f, Vec2{-g});
}

TEST(Repulsion, DecreasesWithDistance) {
  double previous = INFINITY;
  for (double d = 0.1; d < 5.0; d += 0.1) {
    const double m = nerfsim::repulsion_force(Vec2{d, 0.0}, 0.3, Vec2::Zero(), 0.3, {2.1, 0.3}).force.norm();
    EXPECT_LT(m, previous);
    previous = m;
  }
}

TEST(Repulsion, CoincidentFallsBackToPlusX) {
  const auto r = nerfsim::repulsion_force(Vec2{1.0, 1.0}, 0.3, Vec2{1.0, 1.0}, 0.2, {2.0, 0.5});
  EXPECT_TRUE(r.coincident);
  EXPECT_DOUBLE_EQ(r.force.x(), 2.0 * std::exp(1.0));
  EXPECT_EQ(r.force.y(), 0.0);
}

TEST(Presets, ScaredDoublesRobotStrength) {
  const auto calm = nerfsim::preset("calm");
  const auto scared = nerfsim::preset("scared");
  EXPECT_DOUBLE_EQ(scared.robot.strength, 2.0 * calm.robot.strength);
  for (const auto& name : nerfsim::preset_names()) {
    EXPECT_NO_THROW(nerfsim::preset(name).validate());
  }
  EXPECT_THROW(nerfsim::preset("furious"), ConfigError);
}

/// Closed-form arrival time of a lone agent relaxing from rest: x(t) = v0 (t - tau (1 - e^{-t/tau})).
double RelaxationArrivalTime(double distance, double v0, double tau) {
  double lo = 0.0;
  double hi = 100.0;
  for (int i = 0; i < 200; ++i) {
    const double t = 0.5 * (lo + hi);
    (v0 * (t - tau * (1.0 - std::exp(-t / tau))) < distance ? lo : hi) = t;
  }
  return hi;
}

TEST(StepCrowd, LoneAgentReachesGoal) {
  std::vector<Agent> agents{make_agent(0, Vec2::Zero(), {Vec2{10.0, 0.0}})};
  double arrival = -1.0;
  for (int i = 1; i <= 200 && arrival < 0.0; ++i) {
    agents = nerfsim::step_crowd(agents, std::nullopt, {}, 0.05);
    if (agents[0].waypoints.empty()) {
      arrival = i * 0.05;
    }
  }
  ASSERT_GT(arrival, 0.0);
  EXPECT_LE(arrival, 10.0);
  // fine-step oracle of the same dynamics
  std::vector<Agent> fine{make_agent(0, Vec2::Zero(), {Vec2{10.0, 0.0}})};
  double fine_arrival = -1.0;
  for (int i = 1; i <= 20000 && fine_arrival < 0.0; ++i) {
    fine = nerfsim::step_crowd(fine, std::nullopt, {}, 1e-3);
    if (fine[0].waypoints.empty()) {
      fine_arrival = i * 1e-3;
    }
  }
  const double closed_form = RelaxationArrivalTime(10.0 - 0.3, 1.4, 0.5);
  EXPECT_NEAR(fine_arrival, closed_form, 0.01);
  EXPECT_NEAR(arrival, closed_form, 0.1);
}

TEST(StepCrowd, ZeroInteractionSpeedConvergesToDesired) {
  std::vector<Agent> agents{make_agent(0, Vec2::Zero(), {Vec2{1000.0, 300.0}})};
  for (int i = 0; i < 100; ++i) {
    agents = nerfsim::step_crowd(agents, std::nullopt, {}, 0.05);
  }
  EXPECT_NEAR(agents[0].velocity.norm(), 1.4, 0.014);
}

TEST(StepCrowd, PointReflectedPairStaysSymmetric) {
  std::vector<Agent> agents{make_agent(0, Vec2{-5.0, 0.2}, {Vec2{5.0, -0.1}}),
                            make_agent(1, Vec2{5.0, -0.2}, {Vec2{-5.0, 0.1}})};
  for (int i = 0; i < 200; ++i) {
    agents = nerfsim::step_crowd(agents, std::nullopt, {}, 0.05);
    ASSERT_LE((agents[0].position + agents[1].position).norm(), 1e-9) << "step " << i;
    ASSERT_LE((agents[0].velocity + agents[1].velocity).norm(), 1e-9) << "step " << i;
  }
}

TEST(StepCrowd, ScaredKeepsMoreClearanceThanCalm) {
  const double calm = nerfsim::testing::drive_by_min_clearance("calm");
  const double scared = nerfsim::testing::drive_by_min_clearance("scared");
  EXPECT_GT(scared, calm);
}

TEST(StepCrowd, TwentyAgentsStayFiniteAndCapped) {
  std::vector<Segment> walls;
  auto agents = nerfsim::testing::twenty_agents(walls);
  for (int i = 0; i < 10000; ++i) {
    agents = nerfsim::step_crowd(agents, RobotDisc{Vec2{std::sin(0.01 * i), 0.0}, 0.5}, walls, 0.05);
    for (const auto& a : agents) {
      ASSERT_LE(a.velocity.norm(), a.profile.max_speed() * (1.0 + 1e-12));
      ASSERT_TRUE(std::isfinite(a.position.x()) && std::isfinite(a.position.y()));
      ASSERT_GE(a.gait_phase, 0.0);
      ASSERT_LT(a.gait_phase, 1.0);
    }
  }
}

TEST(StepCrowd, Deterministic) {
  std::vector<Segment> walls;
  auto a = nerfsim::testing::twenty_agents(walls);
  auto b = a;
  for (int i = 0; i < 300; ++i) {
    a = nerfsim::step_crowd(a, RobotDisc{Vec2{1.0, 0.0}, 0.5}, walls, 0.05);
    b = nerfsim::step_crowd(b, RobotDisc{Vec2{1.0, 0.0}, 0.5}, walls, 0.05);
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].position, b[i].position);
    EXPECT_EQ(a[i].velocity, b[i].velocity);
    EXPECT_EQ(a[i].gait_phase, b[i].gait_phase);
  }
}

TEST(StepCrowd, StationaryAgentKeepsGaitPhaseAndHeading) {
  Agent a = make_agent(0, Vec2{1.0, 2.0}, {});
  a.gait_phase = 0.37;
  a.heading = 1.1;
  std::vector<Agent> agents{a};
  for (int i = 0; i < 50; ++i) {
    agents = nerfsim::step_crowd(agents, std::nullopt, {}, 0.05);
  }
  EXPECT_EQ(agents[0].gait_phase, 0.37);
  EXPECT_EQ(agents[0].heading, 1.1);
  EXPECT_EQ(agents[0].position, a.position);
}

TEST(StepCrowd, AgentWithoutWaypointsComesToRest) {
  Agent a = make_agent(0, Vec2::Zero(), {});
  a.velocity = Vec2{1.2, 0.0};
  std::vector<Agent> agents{a};
  for (int i = 0; i < 200; ++i) {
    agents = nerfsim::step_crowd(agents, std::nullopt, {}, 0.05);
  }
  EXPECT_LT(agents[0].velocity.norm(), 1e-6);
}

TEST(StepCrowd, PatrolRequeuesWaypoints) {
  Agent a = make_agent(0, Vec2::Zero(), {Vec2{2.0, 0.0}, Vec2{0.0, 0.0}});
  a.patrol = true;
  std::vector<Agent> agents{a};
  for (int i = 0; i < 400; ++i) {
    agents = nerfsim::step_crowd(agents, std::nullopt, {}, 0.05);
    ASSERT_EQ(agents[0].waypoints.size(), 2u);
  }
  EXPECT_GT(agents[0].velocity.norm(), 0.1);
}

TEST(StepCrowd, ObstacleRepelsAgent) {
  const std::vector<Segment> wall{Segment{Vec2{-5.0, 0.5}, Vec2{5.0, 0.5}}};
  Agent a = make_agent(0, Vec2::Zero(), {});
  const auto moved = nerfsim::step_crowd(std::vector<Agent>{a}, std::nullopt, wall, 0.05);
  EXPECT_LT(moved[0].velocity.y(), 0.0);
  EXPECT_NEAR(moved[0].velocity.x(), 0.0, 1e-15);
}

TEST(StepCrowd, RejectsBadInput) {
  std::vector<Agent> agents{make_agent(7, Vec2::Zero(), {Vec2{1.0, 0.0}})};
  EXPECT_THROW(nerfsim::step_crowd(agents, std::nullopt, {}, 0.0), std::invalid_argument);
  agents[0].velocity = Vec2{NAN, 0.0};
  try {
    nerfsim::step_crowd(agents, std::nullopt, {}, 0.05);
    FAIL() << "expected a failure";
  } catch (const nerfsim::RuntimeFailure& e) {
    EXPECT_NE(std::string(e.what()).find("agent 7"), std::string::npos);
  }
}

TEST(CrowdScenario, ParsesAgentsAndObstacles) {
  const auto json = nerfsim::parse_json(R"({
    "agents": [
      {"start": [0, 1], "waypoints": [[2, 3], [4, 5]], "preset": "scared", "patrol": true,
       "overrides": {"desired_speed": 1.1, "robot_repulsion": {"strength": 9}}},
      {"id": 10, "start": [1, 1]}
    ],
    "obstacles": [{"a": [0, 0], "b": [1, 0]}]})",
                                        "test");
  const auto s = nerfsim::parse_crowd_scenario(json);
  ASSERT_EQ(s.agents.size(), 2u);
  EXPECT_EQ(s.agents[0].id, 0);
  EXPECT_EQ(s.agents[1].id, 10);
  EXPECT_EQ(s.agents[0].waypoints.size(), 2u);
  EXPECT_TRUE(s.agents[0].patrol);
  EXPECT_DOUBLE_EQ(s.agents[0].profile.desired_speed, 1.1);
  EXPECT_DOUBLE_EQ(s.agents[0].profile.robot.strength, 9.0);
  EXPECT_DOUBLE_EQ(s.agents[0].profile.robot.range, 0.3);
  EXPECT_EQ(s.obstacles.size(), 1u);
}

TEST(CrowdScenario, DiagnosticsNameThePath) {
  const auto bad_preset = nerfsim::parse_json(R"({"agents": [{"start": [0, 0], "preset": "angry"}]})", "t");
  try {
    nerfsim::parse_crowd_scenario(bad_preset);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("agents[0].preset"), std::string::npos);
  }
  const auto negative = nerfsim::parse_json(R"({"agents": [{"start": [0, 0], "overrides": {"body_radius": -1}}]})", "t");
  EXPECT_THROW(nerfsim::parse_crowd_scenario(negative), ConfigError);
  const auto dup = nerfsim::parse_json(R"({"agents": [{"id": 1, "start": [0, 0]}, {"id": 1, "start": [1, 0]}]})", "t");
  EXPECT_THROW(nerfsim::parse_crowd_scenario(dup), ConfigError);
}

}  // namespace
