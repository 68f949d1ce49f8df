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

#ifndef NERFSIM_FIT_HPP
#define NERFSIM_FIT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nerfsim/errors.hpp"
#include "nerfsim/field.hpp"
#include "nerfsim/image.hpp"
#include "nerfsim/parallel.hpp"
#include "nerfsim/render.hpp"
#include "nerfsim/rng.hpp"

/**
 * \file
 * \brief Photometric fitting of a VoxelGridField to posed images.
 *
 * The loss is the mean over rays and color channels of the squared error between the
 * volume-rendered color and the target. Its gradient is propagated analytically through the
 * compositing sums, the trilinear weights and the per-vertex activations.
 */

namespace nerfsim {

/// A training ray and the color it should render to.
struct TargetRay {
  Ray ray;
  Vec3 target;
  /// Keys the stratified sample stream of this ray.
  std::uint64_t id = 0;
};

struct PosedImage {
  Pose world_from_cam;
  CameraIntrinsics intrinsics;
  RgbImage image;
};

/// Posed views with a train/held-out split.
struct PosedImageSet {
  std::vector<PosedImage> views;
  std::vector<std::size_t> train;
  std::vector<std::size_t> heldout;

  /// Every `heldout_every`-th view (starting at 0) is held out; 0 disables holding out.
  void split(std::size_t heldout_every = 8) {
    train.clear();
    heldout.clear();
    for (std::size_t i = 0; i < views.size(); ++i) {
      if (heldout_every > 0 && i % heldout_every == 0 && views.size() > 1) {
        heldout.push_back(i);
      } else {
        train.push_back(i);
      }
    }
  }
};

template <RadianceField F>
double photometric_loss(const F& field, std::span<const TargetRay> rays, const RaySampling& sampling) {
  if (rays.empty()) {
    throw std::invalid_argument("photometric_loss: empty ray batch");
  }
  std::vector<double> per_ray(rays.size());
  parallel_for(rays.size(), [&](std::size_t i) {
    const RayRadiance r = composite_ray(rays[i].ray, field, sampling, rays[i].id);
    per_ray[i] = (r.color - rays[i].target).squaredNorm();
  });
  double sum = 0.0;
  for (double v : per_ray) {
    sum += v;
  }
  return sum / (3.0 * static_cast<double>(rays.size()));
}

struct LossAndGradient {
  double loss = 0.0;
  /// d loss / d raw parameter, same layout as VoxelGridField::params().
  std::vector<double> gradient;
};

namespace detail {

/// Forward + backward pass of one ray. Adds `scale * d|C - target|^2 / d raw` into `grad`; returns |C - target|^2.
inline double accumulate_ray_gradient(const VoxelGridField& field, const TargetRay& tr, const RaySampling& sampling,
                                      double scale, std::vector<double>& grad) {
  struct Sample {
    TrilinearStencil stencil;
    bool inside;
    double t;
    double delta;
    double density;
    Vec3 color;
    double transmittance;  // T_i
    double weight;         // alpha_i T_i
  };
  thread_local std::vector<Sample> samples;
  samples.resize(static_cast<std::size_t>(sampling.samples));

  const Ray& ray = tr.ray;
  SampleSequence seq{ray, sampling, tr.id};
  double t = seq.next();
  double optical_depth = 0.0;
  Vec3 rendered = Vec3::Zero();
  for (int i = 0; i < sampling.samples; ++i) {
    const double t_next = i + 1 < sampling.samples ? seq.next() : ray.t_far;
    Sample& s = samples[i];
    s.t = t;
    s.delta = t_next - t;
    s.inside = field.stencil(ray.at(t), s.stencil);
    if (s.inside) {
      const RadianceSample rs = field.interpolate(s.stencil);
      s.density = rs.density;
      s.color = rs.color;
    } else {
      s.density = 0.0;
      s.color = Vec3::Zero();
    }
    s.transmittance = std::exp(-optical_depth);
    const double tau = s.density * s.delta;
    s.weight = s.transmittance * -std::expm1(-tau);
    rendered += s.weight * s.color;
    optical_depth += tau;
    t = t_next;
  }

  const Vec3 residual = rendered - tr.target;
  const Vec3 d_color = scale * 2.0 * residual;  // d loss / d C
  Vec3 suffix = Vec3::Zero();                    // sum_{k > i} w_k c_k
  for (int i = sampling.samples - 1; i >= 0; --i) {
    const Sample& s = samples[i];
    if (s.inside) {
      const double t_after = s.transmittance * std::exp(-s.density * s.delta);  // T_{i+1}
      const double d_density = s.delta * d_color.dot(t_after * s.color - suffix);
      const Vec3 d_sample_color = s.weight * d_color;
      for (int c = 0; c < 8; ++c) {
        const double w = s.stencil.weight[c];
        if (w == 0.0) {
          continue;
        }
        const std::size_t base = s.stencil.vertex[c] * VoxelGridField::kChannels;
        for (int ch = 0; ch < 3; ++ch) {
          const double a = field.activated(s.stencil.vertex[c], ch);
          grad[base + ch] += w * d_sample_color[ch] * a * (1.0 - a);
        }
        grad[base + VoxelGridField::kDensity] +=
            w * d_density * sigmoid(field.params()[base + VoxelGridField::kDensity]);
      }
    }
    suffix += s.weight * s.color;
  }
  return residual.squaredNorm();
}

}  // namespace detail

/// Rays per reduction chunk; fixed so the summation order never depends on the worker count.
inline constexpr std::size_t kGradientChunk = 128;

/// Exact analytic gradient of photometric_loss with respect to every raw grid parameter.
/**
 * Rays are processed in fixed-size chunks, each into its own buffer; chunk buffers are then summed
 * in chunk order, so the result is bit-identical for any number of worker threads.
 */
inline LossAndGradient loss_gradient(const VoxelGridField& field, std::span<const TargetRay> rays,
                                     const RaySampling& sampling) {
  if (rays.empty()) {
    throw std::invalid_argument("loss_gradient: empty ray batch");
  }
  sampling.validate();
  const double scale = 1.0 / (3.0 * static_cast<double>(rays.size()));
  const std::size_t chunks = (rays.size() + kGradientChunk - 1) / kGradientChunk;
  const std::size_t n = field.params().size();
  std::vector<std::vector<double>> buffers(chunks);
  std::vector<double> chunk_loss(chunks, 0.0);
  parallel_for(chunks, [&](std::size_t c) {
    buffers[c].assign(n, 0.0);
    const std::size_t end = std::min(rays.size(), (c + 1) * kGradientChunk);
    double sum = 0.0;
    for (std::size_t i = c * kGradientChunk; i < end; ++i) {
      sum += detail::accumulate_ray_gradient(field, rays[i], sampling, scale, buffers[c]);
    }
    chunk_loss[c] = sum;
  });
  LossAndGradient out;
  out.gradient = std::move(buffers[0]);
  double total = chunk_loss[0];
  for (std::size_t c = 1; c < chunks; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      out.gradient[i] += buffers[c][i];
    }
    total += chunk_loss[c];
  }
  out.loss = total * scale;
  return out;
}

struct TrainConfig {
  int iterations = 2000;
  /// Rays per step; a value >= the number of training pixels runs full-batch over every pixel in order.
  int rays_per_batch = 1024;
  double learning_rate = 0.2;
  /// The step size decays exponentially to learning_rate * final_lr_scale at the last iteration.
  double final_lr_scale = 0.05;
  /// Decay of the running mean of squared gradients.
  double rms_decay = 0.99;
  double epsilon = 1e-8;
  RaySampling sampling{96, SamplingStrategy::kStratified, 0};
  ClipRange clip{0.05, 20.0};
  std::uint64_t seed = 0;

  void validate() const {
    if (iterations < 0 || rays_per_batch < 1 || !(learning_rate > 0.0) || !(final_lr_scale > 0.0) || !(rms_decay > 0.0 && rms_decay < 1.0) ||
        !(epsilon > 0.0)) {
      throw std::invalid_argument(
          "TrainConfig: need iterations >= 0, rays_per_batch >= 1, learning_rate > 0, 0 < rms_decay < 1");
    }
    sampling.validate();
  }
};

struct TrainResult {
  /// Batch loss before each update.
  std::vector<double> loss_curve;
};

/// All pixels of the training views, pixel p of view j has global index offset_j + p.
class TrainingPixels {
 public:
  TrainingPixels(const PosedImageSet& set, ClipRange clip) : set_{&set}, clip_{clip} {
    std::size_t total = 0;
    for (std::size_t idx : set.train) {
      offsets_.push_back(total);
      total += set.views.at(idx).image.size();
    }
    total_ = total;
  }

  [[nodiscard]] std::size_t size() const { return total_; }

  [[nodiscard]] TargetRay ray(std::size_t global) const {
    const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), global);
    const std::size_t slot = static_cast<std::size_t>(it - offsets_.begin()) - 1;
    const PosedImage& view = set_->views[set_->train[slot]];
    const std::size_t local = global - offsets_[slot];
    const int u = static_cast<int>(local % view.image.width());
    const int v = static_cast<int>(local / view.image.width());
    return TargetRay{pixel_ray(u, v, view.intrinsics, view.world_from_cam, clip_), view.image[local], global};
  }

 private:
  const PosedImageSet* set_;
  ClipRange clip_;
  std::vector<std::size_t> offsets_;
  std::size_t total_ = 0;
};

/// Fits `field` to the training views with RMS-normalized gradient steps.
/**
 * Each step draws `rays_per_batch` pixels uniformly (with replacement) from the stream keyed on
 * (seed, iteration). `on_iteration(i, loss)` is called after every step when provided.
 * Throws RuntimeFailure on a non-finite loss.
 */
inline TrainResult train(VoxelGridField& field, const PosedImageSet& images, const TrainConfig& cfg,
                         const std::function<void(int, double)>& on_iteration = {}) {
  cfg.validate();
  if (images.train.empty()) {
    throw std::invalid_argument("train: at least one training image is required");
  }
  const TrainingPixels pixels{images, cfg.clip};
  const bool full_batch = static_cast<std::size_t>(cfg.rays_per_batch) >= pixels.size();
  const std::size_t batch_size = full_batch ? pixels.size() : static_cast<std::size_t>(cfg.rays_per_batch);

  std::vector<double> mean_square(field.params().size(), 0.0);
  std::vector<TargetRay> batch;
  batch.reserve(batch_size);
  TrainResult result;
  result.loss_curve.reserve(static_cast<std::size_t>(cfg.iterations));
  double decay_power = 1.0;

  for (int it = 0; it < cfg.iterations; ++it) {
    batch.clear();
    CounterRng rng{cfg.seed, static_cast<std::uint64_t>(it)};
    for (std::size_t b = 0; b < batch_size; ++b) {
      batch.push_back(pixels.ray(full_batch ? b : rng.below(pixels.size())));
    }
    RaySampling sampling = cfg.sampling;
    sampling.seed = mix64(cfg.seed ^ mix64(0x5eedULL + static_cast<std::uint64_t>(it)));

    const LossAndGradient lg = loss_gradient(field, batch, sampling);
    if (!std::isfinite(lg.loss)) {
      throw RuntimeFailure("training diverged: non-finite loss at iteration " + std::to_string(it));
    }
    result.loss_curve.push_back(lg.loss);

    decay_power *= cfg.rms_decay;
    const double correction = 1.0 - decay_power;
    const double lr =
        cfg.learning_rate * std::pow(cfg.final_lr_scale, static_cast<double>(it) / std::max(1, cfg.iterations - 1));
    field.modify_params([&](std::span<double> p) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double g = lg.gradient[i];
        mean_square[i] = cfg.rms_decay * mean_square[i] + (1.0 - cfg.rms_decay) * g * g;
        if (g != 0.0) {
          p[i] -= lr * g / (std::sqrt(mean_square[i] / correction) + cfg.epsilon);
        }
      }
    });
    if (on_iteration) {
      on_iteration(it, lg.loss);
    }
  }
  return result;
}

/// Photometric loss over every training pixel.
template <RadianceField F>
double training_set_loss(const F& field, const PosedImageSet& images, const RaySampling& sampling,
                         ClipRange clip = {}) {
  const TrainingPixels pixels{images, clip};
  std::vector<TargetRay> rays;
  rays.reserve(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    rays.push_back(pixels.ray(i));
  }
  return photometric_loss(field, rays, sampling);
}

}  // namespace nerfsim

#endif
