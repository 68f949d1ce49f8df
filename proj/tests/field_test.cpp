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

#include <sstream>

#include <gtest/gtest.h>

#include "nerfsim/field.hpp"
#include "test_utils.hpp"

namespace {

using nerfsim::Aabb;
using nerfsim::AnalyticField;
using nerfsim::Json;
using nerfsim::Primitive;
using nerfsim::Vec3;
using nerfsim::VoxelGridField;

const Vec3 kDir = Vec3::UnitX();

TEST(AnalyticField, InsideSphereReturnsItsSample) {
  const AnalyticField field{Aabb{Vec3::Constant(-5), Vec3::Constant(5)},
                            {Primitive::sphere(Vec3::Zero(), 1.0, Vec3{1, 0, 0}, 5.0)}};
  const auto s = nerfsim::eval_field(field, Vec3::Zero(), kDir);
  EXPECT_EQ(s.color, (Vec3{1, 0, 0}));
  EXPECT_EQ(s.density, 5.0);
  EXPECT_EQ(nerfsim::eval_field(field, Vec3{3, 0, 0}, kDir).density, 0.0);
}

TEST(AnalyticField, OverlapAddsDensityAndBlendsColor) {
  const AnalyticField field{Aabb{Vec3::Constant(-5), Vec3::Constant(5)},
                            {Primitive::box(Vec3::Constant(-1), Vec3::Constant(1), Vec3{1, 1, 1}, 1.0),
                             Primitive::sphere(Vec3::Zero(), 0.5, Vec3{1, 0, 0}, 3.0)}};
  const auto s = field.eval(Vec3::Zero(), kDir);
  EXPECT_DOUBLE_EQ(s.density, 4.0);
  EXPECT_NEAR(s.color.x(), 1.0, 1e-15);
  EXPECT_NEAR(s.color.y(), 0.25, 1e-15);
}

TEST(AnalyticField, HollowShell) {
  const AnalyticField field{Aabb{Vec3::Constant(-5), Vec3::Constant(5)},
                            {Primitive::sphere(Vec3::Zero(), 3.1, Vec3{1, 1, 1}, 1e3, 3.0)}};
  EXPECT_EQ(field.eval(Vec3::Zero(), kDir).density, 0.0);
  EXPECT_EQ(field.eval(Vec3{3.05, 0, 0}, kDir).density, 1e3);
}

TEST(EvalField, RejectsNonFiniteQueries) {
  const AnalyticField field;
  EXPECT_THROW(nerfsim::eval_field(field, Vec3{std::nan(""), 0, 0}, kDir), std::invalid_argument);
  EXPECT_THROW(nerfsim::eval_field(field, Vec3::Zero(), Vec3{2, 0, 0}), std::invalid_argument);
}

TEST(SceneConfig, EmptyPrimitiveListIsEmptyEverywhere) {
  const auto field = nerfsim::make_synthetic_scene(nerfsim::parse_json(
      R"({"bbox": {"min": [-1,-1,-1], "max": [1,1,1]}, "primitives": []})", "scene.json"));
  nerfsim::testing::Gen gen{1};
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(field.eval(gen.vec3(-2, 2), kDir).density, 0.0);
  }
}

TEST(SceneConfig, BoxSpanningBbox) {
  const auto field = nerfsim::make_synthetic_scene(nerfsim::parse_json(R"({
    "bbox": {"min": [-1,-1,-1], "max": [1,1,1]},
    "primitives": [{"kind": "box", "min": [-1,-1,-1], "max": [1,1,1], "color": [0.2,0.4,0.6], "density": 7}]
  })", "scene.json"));
  const auto s = field.eval(Vec3{0.3, -0.9, 0.5}, kDir);
  EXPECT_EQ(s.density, 7.0);
  EXPECT_EQ(s.color, (Vec3{0.2, 0.4, 0.6}));
}

TEST(SceneConfig, SerializeNormalizesDescription) {
  const Json spec = nerfsim::parse_json(R"({
    "bbox": {"min": [-2,-2,0], "max": [2,2,2]},
    "comment": "extra keys are dropped",
    "primitives": [
      {"kind": "sphere", "center": [0,0,1], "radius": 0.5, "color": [1,0,0], "density": 4, "note": "x"},
      {"kind": "box", "min": [-1,-1,0], "max": [1,1,0.1], "color": [0.5,0.5,0.5], "density": 10}
    ]})", "scene.json");
  const Json normalized = nerfsim::scene_to_json(nerfsim::make_synthetic_scene(spec));
  EXPECT_FALSE(normalized.contains("comment"));
  EXPECT_FALSE(normalized["primitives"][0].contains("note"));
  // idempotent
  EXPECT_EQ(nerfsim::scene_to_json(nerfsim::make_synthetic_scene(normalized)), normalized);
}

void ExpectConfigError(const std::string& text, const std::string& needle) {
  try {
    nerfsim::make_synthetic_scene(nerfsim::parse_json(text, "scene.json"));
    FAIL() << "expected ConfigError containing " << needle;
  } catch (const nerfsim::ConfigError& e) {
    EXPECT_NE(std::string{e.what()}.find(needle), std::string::npos) << e.what();
  }
}

TEST(SceneConfig, DiagnosticsNameTheOffendingField) {
  ExpectConfigError("{\n  \"bbox\": {\n  \"min\": [0,0,0],,\n}", "line 3");
  ExpectConfigError(R"({"primitives": []})", "bbox: missing required field");
  ExpectConfigError(R"({"bbox": {"min": [0,0,0], "max": [1,1,1]},
    "primitives": [{"kind": "box", "min": [0,0,0], "max": [1,1,1], "color": [0,0,0], "density": 1},
                   {"kind": "sphere", "center": [0.5,0.5,0.5], "radius": -1, "color": [0,0,0], "density": 1}]})",
                    "primitives[1].radius");
  ExpectConfigError(R"({"bbox": {"min": [0,0,0], "max": [1,1,1]},
    "primitives": [{"kind": "cone", "color": [0,0,0], "density": 1}]})",
                    "primitives[0].kind");
  ExpectConfigError(R"({"bbox": {"min": [0,0,0], "max": [1,1,1]},
    "primitives": [{"kind": "box", "min": [0,0,0], "max": [2,1,1], "color": [0,0,0], "density": 1}]})",
                    "outside the scene bbox");
  ExpectConfigError(R"({"bbox": {"min": [0,0,0], "max": [1,1,1]},
    "primitives": [{"kind": "box", "min": [0,0,0], "max": [1,1,1], "color": [0,2,0], "density": 1}]})",
                    "primitives[0].color");
}

TEST(Activations, SoftplusInverseRoundTrip) {
  for (double y : {1e-4, 0.01, 0.5, 1.0, 10.0, 50.0}) {
    EXPECT_NEAR(nerfsim::softplus(nerfsim::softplus_inverse(y)), y, 1e-12 * std::max(1.0, y));
  }
  EXPECT_GT(nerfsim::sigmoid(-800.0), -1e-300);
  EXPECT_LT(nerfsim::sigmoid(800.0), 1.0 + 1e-15);
}

VoxelGridField RandomGrid(nerfsim::testing::Gen& gen, std::array<int, 3> res) {
  VoxelGridField field{Aabb{Vec3{-1, -2, 0}, Vec3{1, 1, 2}}, res};
  field.modify_params([&](std::span<double> p) {
    for (auto& v : p) {
      v = gen.uniform(-4, 4);
    }
  });
  return field;
}

TEST(VoxelGrid, MidpointOfTwoVerticesAveragesDensity) {
  VoxelGridField field{Aabb{Vec3::Zero(), Vec3::Ones()}, {2, 2, 2}};
  const double lo = nerfsim::softplus_inverse(1.0);
  const double hi = nerfsim::softplus_inverse(3.0);
  field.modify_params([&](std::span<double> p) {
    for (int k = 0; k < 2; ++k) {
      for (int j = 0; j < 2; ++j) {
        p[field.vertex_index(0, j, k) * 4 + 3] = lo;
        p[field.vertex_index(1, j, k) * 4 + 3] = hi;
      }
    }
  });
  EXPECT_NEAR(field.eval(Vec3{0.5, 0, 0}, kDir).density, 2.0, 1e-12);
}

TEST(VoxelGrid, OutsideBoundsIsEmpty) {
  nerfsim::testing::Gen gen{2};
  const auto field = RandomGrid(gen, {4, 4, 4});
  EXPECT_EQ(field.eval(Vec3{1.0001, 0, 1}, kDir).density, 0.0);
  EXPECT_EQ(field.eval(Vec3{0, 0, -0.1}, kDir).density, 0.0);
  EXPECT_GT(field.eval(Vec3{1.0, 1.0, 2.0}, kDir).density, 0.0);
}

TEST(VoxelGrid, ActivationsAreInRange) {
  nerfsim::testing::Gen gen{3};
  const auto field = RandomGrid(gen, {3, 4, 5});
  for (std::size_t v = 0; v < field.vertex_count(); ++v) {
    for (int c = 0; c < 3; ++c) {
      EXPECT_GT(field.activated(v, c), 0.0);
      EXPECT_LT(field.activated(v, c), 1.0);
    }
    EXPECT_GE(field.activated(v, 3), 0.0);
  }
}

TEST(VoxelGrid, InterpolationIsExactAtVertices) {
  nerfsim::testing::Gen gen{4};
  const auto field = RandomGrid(gen, {3, 4, 5});
  for (int k = 0; k < 5; ++k) {
    for (int j = 0; j < 4; ++j) {
      for (int i = 0; i < 3; ++i) {
        const auto s = field.eval(field.vertex_position(i, j, k), kDir);
        const std::size_t v = field.vertex_index(i, j, k);
        EXPECT_NEAR(s.density, field.activated(v, 3), 1e-12);
        for (int c = 0; c < 3; ++c) {
          EXPECT_NEAR(s.color[c], field.activated(v, c), 1e-12);
        }
      }
    }
  }
}

TEST(VoxelGrid, InterpolationStaysWithinCornerRange) {
  nerfsim::testing::Gen gen{5};
  const auto field = RandomGrid(gen, {5, 5, 5});
  for (int n = 0; n < 2000; ++n) {
    const Vec3 x = field.bounds().min + gen.vec3(0, 1).cwiseProduct(field.bounds().extent());
    nerfsim::TrilinearStencil st;
    ASSERT_TRUE(field.stencil(x, st));
    double lo = 1e300;
    double hi = -1e300;
    for (auto v : st.vertex) {
      lo = std::min(lo, field.activated(v, 3));
      hi = std::max(hi, field.activated(v, 3));
    }
    const double d = field.eval(x, kDir).density;
    EXPECT_GE(d, lo - 1e-12);
    EXPECT_LE(d, hi + 1e-12);
    // pure
    EXPECT_EQ(field.eval(x, kDir), field.eval(x, kDir));
  }
}

TEST(VoxelGrid, InitializationIsNearEmptyGray) {
  const auto field = VoxelGridField::initialized(Aabb{Vec3::Zero(), Vec3::Ones()}, {4, 4, 4});
  const auto s = field.eval(Vec3::Constant(0.3), kDir);
  EXPECT_NEAR(s.density, 0.01, 1e-12);
  EXPECT_NEAR(s.color.x(), 0.5, 1e-12);
}

TEST(VoxelCheckpoint, RoundTripPreservesFloat32Params) {
  nerfsim::testing::Gen gen{6};
  const auto field = RandomGrid(gen, {3, 4, 5});
  std::stringstream buffer;
  nerfsim::write_voxel_checkpoint(buffer, field);
  EXPECT_EQ(buffer.str().size(), 16 + 6 * 8 + 3 * 4 + field.params().size() * 4);
  EXPECT_EQ(buffer.str().substr(0, 16), std::string(nerfsim::kVoxelMagic, 16));
  const auto back = nerfsim::read_voxel_checkpoint(buffer);
  EXPECT_EQ(back.bounds(), field.bounds());
  EXPECT_EQ(back.resolution(), field.resolution());
  for (std::size_t i = 0; i < field.params().size(); ++i) {
    EXPECT_EQ(back.params()[i], static_cast<double>(static_cast<float>(field.params()[i])));
  }
}

TEST(VoxelCheckpoint, LayoutIsLittleEndianXFastest) {
  VoxelGridField field{Aabb{Vec3::Zero(), Vec3::Ones()}, {2, 2, 2}};
  field.modify_params([&](std::span<double> p) { p[field.vertex_index(1, 0, 0) * 4 + 3] = 1.5; });
  std::stringstream buffer;
  nerfsim::write_voxel_checkpoint(buffer, field);
  const std::string bytes = buffer.str();
  // resolution begins after magic + 48 bytes of bbox
  EXPECT_EQ(static_cast<unsigned char>(bytes[64]), 2);
  EXPECT_EQ(bytes[65], 0);
  // vertex (1,0,0) density is the 8th float of the parameter block: 1.5f == 0x3fc00000
  const std::size_t offset = 76 + 7 * 4;
  EXPECT_EQ(static_cast<unsigned char>(bytes[offset + 3]), 0x3f);
  EXPECT_EQ(static_cast<unsigned char>(bytes[offset + 2]), 0xc0);
}

TEST(VoxelCheckpoint, RejectsCorruptInput) {
  std::stringstream bad{"definitely not a checkpoint"};
  EXPECT_THROW(nerfsim::read_voxel_checkpoint(bad), nerfsim::ConfigError);
  VoxelGridField field{Aabb{Vec3::Zero(), Vec3::Ones()}, {2, 2, 2}};
  std::stringstream buffer;
  nerfsim::write_voxel_checkpoint(buffer, field);
  std::stringstream truncated{buffer.str().substr(0, buffer.str().size() - 3)};
  EXPECT_THROW(nerfsim::read_voxel_checkpoint(truncated), nerfsim::ConfigError);
}

}  // namespace
