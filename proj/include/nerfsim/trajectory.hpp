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

#ifndef NERFSIM_TRAJECTORY_HPP
#define NERFSIM_TRAJECTORY_HPP

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nerfsim/errors.hpp"
#include "nerfsim/geometry.hpp"

namespace nerfsim {

/// Time-stamped robot body poses with strictly increasing timestamps.
class Trajectory {
 public:
  Trajectory() = default;

  explicit Trajectory(std::vector<StampedPose> samples) : samples_{std::move(samples)} {
    for (std::size_t i = 1; i < samples_.size(); ++i) {
      if (!(samples_[i].time > samples_[i - 1].time)) {
        throw std::invalid_argument("Trajectory: timestamps must be strictly increasing (entry " +
                                    std::to_string(i) + ")");
      }
    }
  }

  [[nodiscard]] bool empty() const { return samples_.empty(); }
  [[nodiscard]] std::size_t size() const { return samples_.size(); }
  [[nodiscard]] const std::vector<StampedPose>& samples() const { return samples_; }
  [[nodiscard]] double start_time() const { return samples_.front().time; }
  [[nodiscard]] double end_time() const { return samples_.back().time; }

  /// Pose at time t; clamps to the first/last sample outside the covered interval.
  [[nodiscard]] Pose pose_at(double t) const {
    if (samples_.empty()) {
      throw std::logic_error("Trajectory: no samples");
    }
    if (t <= samples_.front().time) {
      return samples_.front().pose;
    }
    if (t >= samples_.back().time) {
      return samples_.back().pose;
    }
    const auto upper = std::upper_bound(samples_.begin(), samples_.end(), t,
                                        [](double value, const StampedPose& s) { return value < s.time; });
    const auto& b = *upper;
    const auto& a = *(upper - 1);
    if (t == a.time) {
      return a.pose;
    }
    return interpolate(a.pose, b.pose, (t - a.time) / (b.time - a.time));
  }

 private:
  std::vector<StampedPose> samples_;
};

inline Trajectory read_trajectory(const std::filesystem::path& path) {
  std::ifstream in{path};
  if (!in) {
    throw ConfigError("cannot open trajectory '" + path.string() + "'");
  }
  try {
    return Trajectory{read_tum(in, path.string())};
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace nerfsim

#endif
