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

#ifndef NERFSIM_SIMULATION_HPP
#define NERFSIM_SIMULATION_HPP

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nerfsim/config.hpp"
#include "nerfsim/crowd.hpp"
#include "nerfsim/errors.hpp"
#include "nerfsim/field.hpp"
#include "nerfsim/humanfield.hpp"
#include "nerfsim/render.hpp"
#include "nerfsim/trajectory.hpp"
#include "nerfsim/world.hpp"

/**
 * \file
 * \brief Simulation manifests and the capture loop that writes per-frame sensor files.
 *
 * Manifest layout (paths relative to the manifest file):
 *
 *     {
 *       "scene": {"analytic": "scenes/plaza.json"} | {"checkpoint": "grid.voxel"},
 *       "crowd": "crowds/crossing.json",
 *       "human": "humans/walker.json",
 *       "rig": "rigs/spot_like.json",
 *       "trajectory": "trajectories/straight.txt",
 *       "sampling": {"samples": 128, "strategy": "uniform", "seed": 0},
 *       "simulation": {"dt": 0.05, "duration": 4.0, "culling": true},
 *       "output_dir": "sim_out"
 *     }
 */

namespace nerfsim {

using SceneField = std::variant<AnalyticField, VoxelGridField>;

inline SamplingStrategy parse_strategy(const ConfigNode& node, const std::string& key, SamplingStrategy fallback) {
  if (!node.has(key)) {
    return fallback;
  }
  const std::string s = node.string(key);
  if (s == "uniform") {
    return SamplingStrategy::kUniform;
  }
  if (s == "stratified") {
    return SamplingStrategy::kStratified;
  }
  node.fail(key, "expected \"uniform\" or \"stratified\"");
}

inline RaySampling parse_sampling(const ConfigNode& node, RaySampling fallback) {
  RaySampling s = fallback;
  const auto n = node.integer("samples", s.samples);
  if (n < 1 || n > 65536) {
    node.fail("samples", "must lie in [1, 65536]");
  }
  s.samples = static_cast<int>(n);
  s.strategy = parse_strategy(node, "strategy", s.strategy);
  const auto seed = node.integer("seed", static_cast<long long>(s.seed));
  if (seed < 0) {
    node.fail("seed", "must be non-negative");
  }
  s.seed = static_cast<std::uint64_t>(seed);
  return s;
}

inline SceneField load_scene(const ConfigNode& node, const std::filesystem::path& base) {
  if (node.has("analytic") == node.has("checkpoint")) {
    node.fail("", "give exactly one of \"analytic\" or \"checkpoint\"");
  }
  if (node.has("analytic")) {
    const auto path = resolve_path(base, node.string("analytic"));
    return make_synthetic_scene(load_json(path), path.string());
  }
  const auto path = resolve_path(base, node.string("checkpoint"));
  std::ifstream in{path, std::ios::binary};
  if (!in) {
    throw ConfigError("cannot open checkpoint '" + path.string() + "'");
  }
  try {
    return read_voxel_checkpoint(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

/// A manifest with every referenced file loaded.
struct Simulation {
  SceneField scene;
  WorldSetup setup;
  std::vector<Agent> agents;
  SensorRig rig;
  CaptureOptions capture;
  double dt = 0.05;
  /// Simulated seconds; frames are captured at t0, t0 + dt, ... up to t0 + duration.
  double duration = 0.0;

  /// Number of captured ticks, counting the initial state.
  [[nodiscard]] std::size_t frame_count() const {
    return static_cast<std::size_t>(std::floor(duration / dt + 1e-9)) + 1;
  }
};

/// Loads a manifest already parsed (and overridden). `source` anchors relative paths.
inline Simulation load_simulation(const Json& manifest, const std::filesystem::path& source) {
  const ConfigNode root{manifest, ""};
  Simulation sim;
  sim.scene = load_scene(root.child("scene"), source);
  sim.rig = parse_rig(load_json(resolve_path(source, root.string("rig"))));
  sim.setup.robot_radius = sim.rig.robot_radius;
  sim.setup.trajectory = read_trajectory(resolve_path(source, root.string("trajectory")));
  if (sim.setup.trajectory.empty()) {
    root.fail("trajectory", "trajectory has no poses");
  }
  if (root.has("crowd")) {
    CrowdScenario crowd = parse_crowd_scenario(load_json(resolve_path(source, root.string("crowd"))));
    sim.agents = std::move(crowd.agents);
    sim.setup.obstacles = std::move(crowd.obstacles);
  }
  if (root.has("human")) {
    sim.setup.human = std::make_shared<const CapsuleHuman>(load_human(resolve_path(source, root.string("human"))));
  } else if (!sim.agents.empty()) {
    root.fail("human", "required when the crowd has agents");
  }
  if (root.has("sampling")) {
    sim.capture.sampling = parse_sampling(root.child("sampling"), sim.capture.sampling);
  }
  const double span = sim.setup.trajectory.end_time() - sim.setup.trajectory.start_time();
  if (root.has("simulation")) {
    const ConfigNode node = root.child("simulation");
    sim.dt = node.positive("dt", sim.dt);
    sim.duration = node.non_negative("duration", span);
    sim.capture.culling = node.boolean("culling", true);
  } else {
    sim.duration = span;
  }
  if (sim.frame_count() > 100000) {
    root.fail("simulation", "more than 100000 frames requested");
  }
  return sim;
}

inline std::string frame_file_name(const std::string& sensor, std::size_t frame, SensorKind kind) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "_%05zu.", frame);
  return sensor + buf + sensor_extension(kind);
}

inline void write_sensor_output(const std::filesystem::path& path, const SensorOutput& output) {
  std::visit(
      [&](const auto& data) {
        using T = std::decay_t<decltype(data)>;
        if constexpr (std::is_same_v<T, RgbImage>) {
          write_file(path, write_ppm, data);
        } else if constexpr (std::is_same_v<T, DepthImage>) {
          write_file(path, write_pfm, data);
        } else {
          write_file(path, write_ply, data);
        }
      },
      output.data);
}

struct SimulationSummary {
  std::size_t frames = 0;
  std::size_t files = 0;
};

/// Steps the world and writes every due sensor output plus `index.csv` (frame,time,sensor,path) into `out_dir`.
/**
 * `on_frame(frame, state, outputs)` is called after each frame is written when provided.
 */
inline SimulationSummary run_simulation(
    const Simulation& sim, const std::filesystem::path& out_dir,
    const std::function<void(std::size_t, const WorldState&, const std::vector<SensorOutput>&)>& on_frame = {}) {
  std::filesystem::create_directories(out_dir);
  std::ofstream index{out_dir / "index.csv"};
  if (!index) {
    throw RuntimeFailure("cannot write '" + (out_dir / "index.csv").string() + "'");
  }
  index << "frame,time,sensor,path\n";
  SimulationSummary summary;
  WorldState state = initial_state(sim.setup, sim.agents);
  const std::size_t frames = sim.frame_count();
  for (std::size_t frame = 0; frame < frames; ++frame) {
    if (frame > 0) {
      state = step(state, sim.setup, sim.dt);
    }
    const auto outputs =
        std::visit([&](const auto& scene) { return capture(scene, state, sim.rig, frame, sim.capture); }, sim.scene);
    for (const auto& o : outputs) {
      const std::string name = frame_file_name(o.sensor, frame, o.kind);
      write_sensor_output(out_dir / name, o);
      char time[32];
      std::snprintf(time, sizeof(time), "%.6f", state.time);
      index << frame << ',' << time << ',' << o.sensor << ',' << name << '\n';
      ++summary.files;
    }
    if (on_frame) {
      on_frame(frame, state, outputs);
    }
    ++summary.frames;
  }
  index.flush();
  if (!index) {
    throw RuntimeFailure("failed writing '" + (out_dir / "index.csv").string() + "'");
  }
  return summary;
}

}  // namespace nerfsim

#endif
