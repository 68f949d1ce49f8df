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

#include <algorithm>
#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "nerfsim/humanfield.hpp"
#include "scenarios.hpp"
#include "test_utils.hpp"

namespace {

using nerfsim::Aabb;
using nerfsim::CapsuleHuman;
using nerfsim::PosedHuman;
using nerfsim::Pose;
using nerfsim::Vec2;
using nerfsim::Vec3;

std::shared_ptr<const CapsuleHuman> Walker() {
  static const auto human =
      std::make_shared<const CapsuleHuman>(nerfsim::load_human(NERFSIM_DATA_DIR "/humans/walker.json"));
  return human;
}

TEST(Gait, KeyframePhaseReproducesKeyframe) {
  const auto& gait = Walker()->gait();
  const std::size_t k = gait.keyframes.size();
  for (std::size_t i = 0; i + 1 < k; ++i) {
    const auto sampled = gait.sample(static_cast<double>(i) / static_cast<double>(k - 1));
    for (std::size_t b = 0; b < gait.bones.size(); ++b) {
      EXPECT_LE((sampled[b].translation() - gait.keyframes[i][b].translation()).norm(), 1e-9);
      EXPECT_LE(sampled[b].rotation().angularDistance(gait.keyframes[i][b].rotation()), 1e-9);
    }
  }
}

TEST(Gait, PeriodicWhenLastKeyframeRepeatsFirst) {
  const auto& human = *Walker();
  const auto a = human.posed_capsules(0.0);
  const auto b = human.posed_capsules(1.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_LE((a[i].a - b[i].a).norm(), 1e-12);
    EXPECT_LE((a[i].b - b[i].b).norm(), 1e-12);
  }
}

TEST(Gait, DefaultWalkerHasTenBones) {
  EXPECT_EQ(Walker()->bones().size(), 10u);
  EXPECT_EQ(Walker()->gait().keyframes.size(), 4u);
  EXPECT_DOUBLE_EQ(Walker()->gait().cycle_length, 1.4);
}

TEST(EvalHuman, AxisMidpointReturnsCapsuleSample) {
  const auto human = Walker();
  const PosedHuman posed{human, Pose::from_yaw(0.7, Vec3{2.0, -1.0, 0.0}), 0.3};
  for (std::size_t i = 0; i < posed.capsules().size(); ++i) {
    const auto& c = posed.capsules()[i];
    const Vec3 mid = posed.world_from_human().apply(0.5 * (c.a + c.b));
    const auto s = nerfsim::eval_human(posed, mid, Vec3::UnitX());
    EXPECT_GT(s.density, 0.0) << human->bones()[i].name;
  }
  const auto& torso = human->bones()[1];
  const auto& c = posed.capsules()[1];
  const auto s = nerfsim::eval_human(posed, posed.world_from_human().apply(0.5 * (c.a + c.b)), Vec3::UnitX());
  EXPECT_EQ(s.color, torso.color);
  EXPECT_EQ(s.density, torso.density);
}

TEST(EvalHuman, NearestCapsuleWins) {
  const auto human = Walker();
  const PosedHuman posed{human, Pose::from_yaw(-0.4, Vec3{1.0, 0.5, 0.0}), 0.6};
  const Aabb box = human->bbox();
  nerfsim::testing::Gen gen{11};
  int inside = 0;
  for (int n = 0; n < 20000; ++n) {
    const Vec3 local{gen.uniform(box.min.x(), box.max.x()), gen.uniform(box.min.y(), box.max.y()),
                     gen.uniform(box.min.z(), box.max.z())};
    int best = -1;
    double best_d = 1e300;
    for (std::size_t i = 0; i < posed.capsules().size(); ++i) {
      const auto& c = posed.capsules()[i];
      const Vec3 ab = c.b - c.a;
      const double t = std::clamp((local - c.a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
      const double d = (local - (c.a + t * ab)).norm();
      if (d < c.radius && d < best_d) {
        best = static_cast<int>(i);
        best_d = d;
      }
    }
    const auto s = nerfsim::eval_human(posed, posed.world_from_human().apply(local), Vec3::UnitX());
    if (best < 0) {
      EXPECT_EQ(s.density, 0.0);
      continue;
    }
    ++inside;
    EXPECT_EQ(s.density, human->bones()[best].density);
    EXPECT_EQ(s.color, human->bones()[best].color);
  }
  EXPECT_GT(inside, 100);
}

TEST(EvalHuman, FarAwayIsEmpty) {
  const PosedHuman posed{Walker(), Pose{Vec3{0.0, 0.0, 0.0}}, 0.0};
  EXPECT_EQ(nerfsim::eval_human(posed, Vec3{50.0, 0.0, 1.0}, Vec3::UnitX()).density, 0.0);
}

TEST(EvalHuman, DensityImpliesInsideBbox) {
  nerfsim::testing::Gen gen{11};
  const auto human = Walker();
  for (int trial = 0; trial < 20; ++trial) {
    const PosedHuman posed = PosedHuman::on_ground(human, Vec2{gen.uniform(-3, 3), gen.uniform(-3, 3)},
                                                   gen.uniform(-M_PI, M_PI), gen.uniform(0.0, 1.0));
    const auto corners = nerfsim::human_bbox_world(posed);
    const Pose inv = posed.world_from_human().inverse();
    for (int i = 0; i < 2000; ++i) {
      const Vec3 x = posed.world_from_human().apply(gen.vec3(-1.2, 1.2) + Vec3{0.0, 0.0, 1.0});
      if (nerfsim::eval_human(posed, x, Vec3::UnitZ()).density > 0.0) {
        EXPECT_TRUE(human->bbox().contains(inv.apply(x)));
      }
    }
    EXPECT_EQ(corners.size(), 8u);
  }
}

TEST(Bbox, EnclosesSweptCapsulesAtEveryPhase) {
  const auto& human = *Walker();
  for (int i = 0; i <= 1000; ++i) {
    for (const auto& c : human.posed_capsules(i / 1000.0)) {
      for (const Vec3& e : {c.a, c.b}) {
        EXPECT_TRUE(human.bbox().contains(Aabb{e - Vec3::Constant(c.radius), e + Vec3::Constant(c.radius)}));
      }
    }
  }
}

TEST(Bbox, WorldCorners) {
  const auto human = Walker();
  const Aabb& box = human->bbox();
  const auto local = box.corners();
  const auto identity = nerfsim::human_bbox_world(PosedHuman{human, Pose::identity(), 0.0});
  for (int i = 0; i < 8; ++i) {
    EXPECT_EQ(identity[i], local[i]);
  }
  const Vec3 t{1.5, -2.0, 0.0};
  const auto shifted = nerfsim::human_bbox_world(PosedHuman{human, Pose{t}, 0.0});
  for (int i = 0; i < 8; ++i) {
    EXPECT_LE((shifted[i] - (local[i] + t)).norm(), 1e-12);
  }
  const auto yawed = nerfsim::human_bbox_world(PosedHuman{human, Pose::from_yaw(M_PI / 2, Vec3::Zero()), 0.0});
  Aabb rotated = Aabb::empty();
  for (const auto& c : yawed) {
    rotated.expand(c);
  }
  // +90 degree yaw maps (x, y) to (-y, x)
  EXPECT_NEAR(rotated.min.x(), -box.max.y(), 1e-12);
  EXPECT_NEAR(rotated.max.x(), -box.min.y(), 1e-12);
  EXPECT_NEAR(rotated.min.y(), box.min.x(), 1e-12);
  EXPECT_NEAR(rotated.max.y(), box.max.x(), 1e-12);
}

TEST(CapsuleHuman, RejectsTooSmallBbox) {
  const auto base = nerfsim::testing::small_human();
  const Aabb tight{Vec3{-0.1, -0.1, 0.0}, Vec3{0.1, 0.1, 1.5}};
  EXPECT_THROW((CapsuleHuman{base.bones(), base.gait(), tight}), std::invalid_argument);
  EXPECT_NO_THROW((CapsuleHuman{base.bones(), base.gait(), base.bbox()}));
}

TEST(CapsuleHuman, RejectsBadSkeletons) {
  auto bones = nerfsim::testing::small_human().bones();
  const auto gait = nerfsim::testing::small_human().gait();
  auto dup = bones;
  dup[2].name = "left_leg";
  EXPECT_THROW((CapsuleHuman{dup, gait}), std::invalid_argument);
  auto zero = bones;
  zero[0].density = 0.0;
  EXPECT_THROW((CapsuleHuman{zero, gait}), std::invalid_argument);
  auto unknown = gait;
  unknown.bones[0] = "tail";
  EXPECT_THROW((CapsuleHuman{bones, unknown}), std::invalid_argument);
}

TEST(PosedHuman, MustStandOnGround) {
  EXPECT_THROW((PosedHuman{Walker(), Pose{Vec3{0.0, 0.0, 0.2}}, 0.0}), std::invalid_argument);
}

TEST(GaitFile, RoundTrips) {
  const auto& gait = Walker()->gait();
  const auto again = nerfsim::parse_gait(nerfsim::gait_to_json(gait));
  ASSERT_EQ(again.keyframes.size(), gait.keyframes.size());
  for (std::size_t k = 0; k < gait.keyframes.size(); ++k) {
    for (std::size_t b = 0; b < gait.bones.size(); ++b) {
      EXPECT_LE(again.keyframes[k][b].rotation().angularDistance(gait.keyframes[k][b].rotation()), 1e-12);
    }
  }
  EXPECT_THROW(nerfsim::parse_gait(nerfsim::parse_json(R"({"cycle_length": 1, "bones": ["a"], "keyframes": [[{}]]})", "t")),
               nerfsim::ConfigError);
}

}  // namespace
