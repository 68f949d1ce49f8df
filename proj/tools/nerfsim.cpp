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

// nerfsim command-line tool: dataset synthesis, grid training, sensor rendering, simulation and evaluation.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nerfsim/nerfsim.hpp"

namespace fs = std::filesystem;
using namespace nerfsim;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr const char* kOutputEnv = "NERFSIM_OUTPUT_DIR";

struct CommonOptions {
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string out;
  std::vector<std::string> overrides;
};

void add_common_options(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--seed", opts.seed, "Random seed (overrides the config's seed)");
  cmd->add_option("--threads", opts.threads, "Worker threads, 0 = all cores; results do not depend on it")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", opts.out, "Output directory (overrides $NERFSIM_OUTPUT_DIR and the config)");
  cmd->add_option("--set", opts.overrides, "Config override dotted.key=value (repeatable)");
}

/// Output directory staged as `<out>.partial` and renamed into place on success.
class StagedOutput {
 public:
  explicit StagedOutput(const fs::path& final_dir)
      : final_{fs::absolute(final_dir).lexically_normal()}, staging_{final_.string() + ".partial"} {
    if (fs::exists(final_) && !(fs::is_directory(final_) && fs::exists(final_ / "manifest.resolved"))) {
      throw ConfigError("refusing to replace '" + final_.string() + "': not a previous nerfsim output directory");
    }
    fs::remove_all(staging_);
    fs::create_directories(staging_);
  }
  StagedOutput(const StagedOutput&) = delete;
  StagedOutput& operator=(const StagedOutput&) = delete;

  ~StagedOutput() {
    if (!committed_) {
      std::error_code ec;
      fs::remove_all(staging_, ec);
    }
  }

  [[nodiscard]] const fs::path& dir() const { return staging_; }
  [[nodiscard]] const fs::path& final_dir() const { return final_; }

  void commit() {
    fs::remove_all(final_);
    fs::rename(staging_, final_);
    committed_ = true;
  }

 private:
  fs::path final_;
  fs::path staging_;
  bool committed_ = false;
};

/// A config file with overrides applied, relative paths made absolute, and the seed and output directory settled.
struct ResolvedConfig {
  Json json;
  fs::path out;
  std::uint64_t seed = 0;
};

Json* find_key(Json& root, const std::string& dotted) {
  Json* node = &root;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const std::string part = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(part)) {
      return nullptr;
    }
    node = &(*node)[part];
    if (dot == std::string::npos) {
      return node;
    }
    start = dot + 1;
  }
}

void absolutize(Json& root, const std::string& key, const fs::path& base) {
  Json* v = find_key(root, key);
  if (v != nullptr && v->is_string()) {
    const fs::path p{v->get<std::string>()};
    *v = (p.is_absolute() ? p : (base / p)).lexically_normal().string();
  }
}

/// Paths in the file resolve against its directory; paths set on the command line resolve against the working directory.
ResolvedConfig resolve_config(const fs::path& config_path, const CommonOptions& opts,
                              const std::vector<std::string>& path_keys) {
  ResolvedConfig rc;
  rc.json = load_json(config_path);
  if (!rc.json.is_object()) {
    throw ConfigError(config_path.string() + ": expected a JSON object");
  }
  const fs::path config_dir = fs::absolute(config_path).parent_path();
  for (const auto& key : path_keys) {
    absolutize(rc.json, key, config_dir);
  }
  for (const auto& assignment : opts.overrides) {
    apply_override(rc.json, assignment);
    const std::string key = assignment.substr(0, assignment.find('='));
    if (std::find(path_keys.begin(), path_keys.end(), key) != path_keys.end()) {
      absolutize(rc.json, key, fs::current_path());
    }
  }
  if (opts.seed) {
    rc.seed = *opts.seed;
  } else if (rc.json.contains("seed")) {
    if (!rc.json["seed"].is_number_unsigned()) {
      throw ConfigError("seed: expected a non-negative integer");
    }
    rc.seed = rc.json["seed"].get<std::uint64_t>();
  }
  rc.json["seed"] = rc.seed;

  const char* env = std::getenv(kOutputEnv);
  if (!opts.out.empty()) {
    rc.out = opts.out;
  } else if (env != nullptr && *env != '\0') {
    rc.out = env;
  } else if (rc.json.contains("output_dir") && rc.json["output_dir"].is_string()) {
    rc.out = rc.json["output_dir"].get<std::string>();
  } else {
    throw ConfigError("no output directory: pass --out, set " + std::string(kOutputEnv) + " or add output_dir");
  }
  // the run directory is not part of the reproducible record
  rc.json.erase("output_dir");
  return rc;
}

void write_resolved(const fs::path& dir, const std::string& command, const Json& config) {
  Json record{{"command", command}, {"config", config}};
  std::ofstream out{dir / "manifest.resolved"};
  out << record.dump(2) << '\n';
  if (!out) {
    throw RuntimeFailure("cannot write manifest.resolved");
  }
}

std::vector<StampedPose> load_poses(const ConfigNode& root) {
  if (root.has("orbit")) {
    const ConfigNode o = root.child("orbit");
    const auto count = o.integer("count");
    if (count < 1 || count > 100000) {
      o.fail("count", "must lie in [1, 100000]");
    }
    std::vector<double> heights;
    for (const auto& h : o.array("heights")) {
      if (!h.is_number()) {
        o.fail("heights", "expected numbers");
      }
      heights.push_back(h.get<double>());
    }
    if (heights.empty()) {
      o.fail("heights", "at least one height is required");
    }
    const Vec3 target = o.has("target") ? o.vec3("target") : Vec3::Zero();
    return orbit_poses(static_cast<int>(count), o.positive("radius"), heights, target);
  }
  const fs::path path = root.string("poses");
  std::ifstream in{path};
  if (!in) {
    root.fail("poses", "cannot open '" + path.string() + "'");
  }
  auto poses = read_tum(in, path.string());
  if (poses.empty()) {
    root.fail("poses", "no poses in '" + path.string() + "'");
  }
  return poses;
}

ClipRange parse_clip(const ConfigNode& node, ClipRange clip) {
  clip.near = node.non_negative("near", clip.near);
  clip.far = node.positive("far", clip.far);
  if (!(clip.near < clip.far)) {
    node.fail("far", "must exceed near");
  }
  return clip;
}

std::string frame_name(const std::string& prefix, std::size_t i, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "_%05zu.", i);
  return prefix + buf + ext;
}

std::string format_double(double v) {
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// ---------------------------------------------------------------- make-synthetic

int cmd_make_synthetic(const fs::path& config, const CommonOptions& opts) {
  const ResolvedConfig rc = resolve_config(config, opts, {"scene", "poses"});
  const ConfigNode root{rc.json, ""};
  const fs::path scene_path = root.string("scene");
  const AnalyticField scene = make_synthetic_scene(load_json(scene_path), scene_path.string());
  const auto poses = load_poses(root);
  const CameraIntrinsics k = intrinsics_from_json(root.child("camera"));
  RaySampling sampling{512, SamplingStrategy::kUniform, rc.seed};
  ClipRange clip{0.05, 20.0};
  if (root.has("render")) {
    const ConfigNode r = root.child("render");
    sampling = parse_sampling(r, sampling);
    sampling.seed = rc.seed;
    clip = parse_clip(r, clip);
  }
  StagedOutput out{rc.out};
  PosedImageSet set = render_views(scene, poses, k, sampling, clip);
  write_dataset(out.dir(), set);
  std::ofstream{out.dir() / "scene.json"} << scene_to_json(scene).dump(2) << '\n';
  write_resolved(out.dir(), "make-synthetic", rc.json);
  out.commit();
  std::cout << "wrote " << set.views.size() << " views to " << out.final_dir().string() << '\n';
  return 0;
}

// ---------------------------------------------------------------- train

int cmd_train(const fs::path& config, const CommonOptions& opts) {
  const ResolvedConfig rc = resolve_config(config, opts, {"dataset", "init"});
  const ConfigNode root{rc.json, ""};
  const auto heldout_every = root.integer("heldout_every", 8);
  if (heldout_every < 0) {
    root.fail("heldout_every", "must be >= 0");
  }
  PosedImageSet data = read_dataset(root.string("dataset"), static_cast<std::size_t>(heldout_every));
  if (data.train.empty()) {
    root.fail("heldout_every", "leaves no training views");
  }

  const ConfigNode grid = root.child("grid");
  const ConfigNode bbox = grid.child("bbox");
  const Aabb bounds{bbox.vec3("min"), bbox.vec3("max")};
  std::array<int, 3> res{};
  const auto r = grid.vector<3>("resolution");
  for (int a = 0; a < 3; ++a) {
    if (r[a] < 2 || r[a] > 512 || r[a] != std::floor(r[a])) {
      grid.fail("resolution", "entries must be integers in [2, 512]");
    }
    res[a] = static_cast<int>(r[a]);
  }
  VoxelGridField field = [&] {
    try {
      return VoxelGridField::initialized(bounds, res);
    } catch (const std::invalid_argument& e) {
      grid.fail("", e.what());
    }
  }();

  TrainConfig cfg;
  cfg.seed = rc.seed;
  if (root.has("train")) {
    const ConfigNode t = root.child("train");
    const auto iterations = t.integer("iterations", cfg.iterations);
    const auto batch = t.integer("rays_per_batch", cfg.rays_per_batch);
    if (iterations < 0 || iterations > 10000000 || batch < 1 || batch > 100000000) {
      t.fail("", "iterations must be >= 0 and rays_per_batch >= 1");
    }
    cfg.iterations = static_cast<int>(iterations);
    cfg.rays_per_batch = static_cast<int>(batch);
    cfg.learning_rate = t.positive("learning_rate", cfg.learning_rate);
    cfg.final_lr_scale = t.positive("final_lr_scale", cfg.final_lr_scale);
    cfg.rms_decay = t.positive("rms_decay", cfg.rms_decay);
    if (cfg.rms_decay >= 1.0) {
      t.fail("rms_decay", "must be below 1");
    }
    cfg.sampling = parse_sampling(t, cfg.sampling);
    cfg.clip = parse_clip(t, cfg.clip);
  }
  cfg.sampling.seed = rc.seed;
  RaySampling eval_sampling{cfg.sampling.samples, SamplingStrategy::kUniform, rc.seed};

  StagedOutput out{rc.out};
  std::ofstream loss_csv{out.dir() / "loss.csv"};
  loss_csv << "iteration,loss\n";
  const auto start = std::chrono::steady_clock::now();
  train(field, data, cfg, [&](int it, double loss) {
    char line[64];
    std::snprintf(line, sizeof(line), "%d,%.9g\n", it, loss);
    loss_csv << line;
    if ((it + 1) % 250 == 0 || it + 1 == cfg.iterations) {
      std::cerr << "iteration " << it + 1 << "/" << cfg.iterations << " loss " << loss << '\n';
    }
  });
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  loss_csv.close();

  {
    std::ofstream ckpt{out.dir() / "field.voxel", std::ios::binary};
    write_voxel_checkpoint(ckpt, field);
    if (!ckpt) {
      throw RuntimeFailure("failed writing field.voxel");
    }
  }
  std::ofstream metrics{out.dir() / "heldout.csv"};
  metrics << "view,psnr,ssim\n";
  double psnr_sum = 0.0;
  fs::create_directories(out.dir() / "heldout");
  for (std::size_t idx : data.heldout) {
    const auto& view = data.views[idx];
    const RgbImage pred = render_camera(view.intrinsics, view.world_from_cam, field, eval_sampling, cfg.clip);
    write_file(out.dir() / "heldout" / frame_name("view", idx, "ppm"), write_ppm, pred);
    const double p = psnr(pred, view.image);
    const double s = view.image.width() >= 11 && view.image.height() >= 11 ? ssim(pred, view.image)
                                                                           : std::nan("");
    psnr_sum += p;
    metrics << idx << ',' << format_double(p) << ',' << format_double(s) << '\n';
  }
  metrics.close();
  write_resolved(out.dir(), "train", rc.json);
  out.commit();
  std::cout << "trained " << cfg.iterations << " iterations in " << format_double(seconds) << " s\n";
  if (!data.heldout.empty()) {
    std::cout << "held-out PSNR " << format_double(psnr_sum / static_cast<double>(data.heldout.size()))
              << " dB over " << data.heldout.size() << " views\n";
  }
  return 0;
}

// ---------------------------------------------------------------- render-*

enum class RenderKind { kCamera, kDepth, kLidar };

int cmd_render(RenderKind kind, const fs::path& config, const CommonOptions& opts) {
  const ResolvedConfig rc = resolve_config(config, opts, {"scene.analytic", "scene.checkpoint", "poses"});
  const ConfigNode root{rc.json, ""};
  const SceneField scene = load_scene(root.child("scene"), config);
  const auto poses = load_poses(root);
  RaySampling sampling{128, SamplingStrategy::kUniform, rc.seed};
  if (root.has("sampling")) {
    sampling = parse_sampling(root.child("sampling"), sampling);
  }
  sampling.seed = rc.seed;

  StagedOutput out{rc.out};
  std::ofstream index{out.dir() / "index.csv"};
  index << "frame,time,sensor,path\n";
  const std::string sensor = root.string("name", kind == RenderKind::kLidar ? "lidar" : "camera");
  if (kind == RenderKind::kLidar) {
    const ConfigNode l = root.child("lidar");
    LidarSpec spec;
    spec.channels = static_cast<int>(l.integer("channels", spec.channels));
    spec.vfov_min_deg = l.number("vfov_min_deg", spec.vfov_min_deg);
    spec.vfov_max_deg = l.number("vfov_max_deg", spec.vfov_max_deg);
    spec.azimuth_count = static_cast<int>(l.integer("azimuth_count", spec.azimuth_count));
    spec.min_range = l.non_negative("min_range", spec.min_range);
    spec.max_range = l.positive("max_range", spec.max_range);
    spec.opacity_threshold = l.non_negative("opacity_threshold", spec.opacity_threshold);
    try {
      spec.validate();
    } catch (const std::invalid_argument& e) {
      l.fail("", e.what());
    }
    for (std::size_t i = 0; i < poses.size(); ++i) {
      const std::string name = frame_name(sensor, i, "ply");
      const PointCloud cloud =
          std::visit([&](const auto& f) { return render_lidar(spec, poses[i].pose, f, sampling); }, scene);
      write_file(out.dir() / name, write_ply, cloud);
      index << i << ',' << format_double(poses[i].time) << ',' << sensor << ',' << name << '\n';
    }
  } else {
    const CameraIntrinsics k = intrinsics_from_json(root.child("camera"));
    const ClipRange clip = parse_clip(root, ClipRange{});
    for (std::size_t i = 0; i < poses.size(); ++i) {
      const Pose& pose = poses[i].pose;
      std::string name;
      if (kind == RenderKind::kCamera) {
        name = frame_name(sensor, i, "ppm");
        const RgbImage img =
            std::visit([&](const auto& f) { return render_camera(k, pose, f, sampling, clip); }, scene);
        write_file(out.dir() / name, write_ppm, img);
      } else {
        name = frame_name(sensor, i, "pfm");
        const DepthImage img =
            std::visit([&](const auto& f) { return render_depth(k, pose, f, sampling, clip); }, scene);
        write_file(out.dir() / name, write_pfm, img);
      }
      index << i << ',' << format_double(poses[i].time) << ',' << sensor << ',' << name << '\n';
    }
  }
  index.close();
  write_resolved(out.dir(), "render", rc.json);
  out.commit();
  std::cout << "rendered " << poses.size() << " frames to " << out.final_dir().string() << '\n';
  return 0;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const fs::path& manifest, const CommonOptions& opts) {
  const ResolvedConfig rc = resolve_config(manifest, opts,
                                           {"scene.analytic", "scene.checkpoint", "crowd", "human", "rig",
                                            "trajectory"});
  Json effective = rc.json;
  effective["sampling"]["seed"] = rc.seed;
  Simulation sim = load_simulation(effective, manifest);
  StagedOutput out{rc.out};
  const auto summary = run_simulation(sim, out.dir(), [&](std::size_t frame, const WorldState& state, const auto&) {
    if (frame % 20 == 0) {
      std::cerr << "frame " << frame << " t=" << format_double(state.time) << '\n';
    }
  });
  write_resolved(out.dir(), "simulate", effective);
  out.commit();
  std::cout << "simulated " << summary.frames << " frames, " << summary.files << " sensor files in "
            << out.final_dir().string() << '\n';
  return 0;
}

// ---------------------------------------------------------------- eval

std::set<std::string> files_with_extension(const fs::path& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) {
    throw ConfigError("'" + dir.string() + "' is not a directory");
  }
  std::set<std::string> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) {
      out.insert(entry.path().filename().string());
    }
  }
  return out;
}

std::vector<std::string> paired_files(const fs::path& pred, const fs::path& gt, const std::string& ext) {
  const auto a = files_with_extension(pred, ext);
  const auto b = files_with_extension(gt, ext);
  std::vector<std::string> missing;
  for (const auto& f : a) {
    if (!b.count(f)) {
      missing.push_back(f + " (no ground truth)");
    }
  }
  for (const auto& f : b) {
    if (!a.count(f)) {
      missing.push_back(f + " (no prediction)");
    }
  }
  if (!missing.empty()) {
    std::string msg = "unpaired files:";
    for (const auto& m : missing) {
      msg += "\n  " + m;
    }
    throw ConfigError(msg);
  }
  if (a.empty()) {
    throw ConfigError("no *" + ext + " files in '" + pred.string() + "'");
  }
  return {a.begin(), a.end()};
}

int cmd_eval(const fs::path& pred, const fs::path& gt, const std::string& kind, const CommonOptions& opts) {
  const char* env = std::getenv(kOutputEnv);
  const fs::path out_path = !opts.out.empty() ? fs::path{opts.out} : (env && *env ? fs::path{env} : fs::path{});
  if (out_path.empty()) {
    throw ConfigError("no output directory: pass --out or set " + std::string(kOutputEnv));
  }
  Json record{{"pred", fs::absolute(pred).lexically_normal().string()},
              {"gt", fs::absolute(gt).lexically_normal().string()},
              {"kind", kind}};
  std::vector<std::string> rows;
  std::string header;
  std::string summary;
  if (kind == "rgb") {
    header = "file,psnr,ssim";
    double psnr_sum = 0.0;
    double ssim_sum = 0.0;
    const auto files = paired_files(pred, gt, ".ppm");
    for (const auto& f : files) {
      const RgbImage p = read_file(pred / f, read_ppm);
      const RgbImage g = read_file(gt / f, read_ppm);
      if (p.width() != g.width() || p.height() != g.height()) {
        throw ConfigError(f + ": image sizes differ");
      }
      const double ps = psnr(p, g);
      const double ss = p.width() >= 11 && p.height() >= 11 ? ssim(p, g) : std::nan("");
      psnr_sum += ps;
      ssim_sum += ss;
      rows.push_back(f + ',' + format_double(ps) + ',' + format_double(ss));
    }
    const auto n = static_cast<double>(files.size());
    rows.push_back("mean," + format_double(psnr_sum / n) + ',' + format_double(ssim_sum / n));
    summary = "mean PSNR " + format_double(psnr_sum / n) + " dB, SSIM " + format_double(ssim_sum / n);
  } else if (kind == "depth") {
    header = "file,abs_rel,delta_1.05,delta_1.10,delta_1.25,delta_1.25^2,delta_1.25^3,valid_pixels";
    for (const auto& f : paired_files(pred, gt, ".pfm")) {
      const DepthImage p = read_file(pred / f, read_pfm);
      const DepthImage g = read_file(gt / f, read_pfm);
      if (p.width() != g.width() || p.height() != g.height()) {
        throw ConfigError(f + ": image sizes differ");
      }
      std::string row = f;
      try {
        const DepthErrorReport r = depth_error(p, g);
        row += ',' + format_double(r.abs_rel);
        for (double d : r.delta) {
          row += ',' + format_double(d);
        }
        row += ',' + std::to_string(r.valid_pixel_count);
      } catch (const std::invalid_argument&) {
        row += ",nan,nan,nan,nan,nan,nan,0";
      }
      rows.push_back(row);
    }
    summary = std::to_string(rows.size()) + " depth maps compared";
  } else if (kind == "trajectory") {
    header = "ate_rmse,pairs";
    const Trajectory est = read_trajectory(pred);
    const Trajectory ref = read_trajectory(gt);
    const double ate = ate_rmse(est, ref);
    rows.push_back(format_double(ate) + ',' + std::to_string(associate(est, ref, AteOptions{}.max_time_difference).size()));
    summary = "ATE RMSE " + format_double(ate) + " m";
  } else {
    throw ConfigError("--kind must be rgb, depth or trajectory");
  }
  StagedOutput out{out_path};
  std::ofstream csv{out.dir() / "metrics.csv"};
  csv << header << '\n';
  for (const auto& r : rows) {
    csv << r << '\n';
  }
  csv.close();
  write_resolved(out.dir(), "eval", record);
  out.commit();
  std::cout << summary << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nerfsim: radiance-field scenes, capsule crowds and robot sensor simulation"};
  app.require_subcommand(1);

  CommonOptions opts;
  std::string config;

  auto* synth = app.add_subcommand("make-synthetic", "Render an analytic scene from posed cameras into a dataset");
  synth->add_option("config", config, "Dataset config (JSON)")->required();
  add_common_options(synth, opts);

  auto* train_cmd = app.add_subcommand("train", "Fit a voxel grid to a posed image dataset");
  train_cmd->add_option("config", config, "Training config (JSON)")->required();
  add_common_options(train_cmd, opts);

  auto* rcam = app.add_subcommand("render-camera", "Render RGB images of a scene from a pose list");
  rcam->add_option("config", config, "Render config (JSON)")->required();
  add_common_options(rcam, opts);
  auto* rdepth = app.add_subcommand("render-depth", "Render depth maps of a scene from a pose list");
  rdepth->add_option("config", config, "Render config (JSON)")->required();
  add_common_options(rdepth, opts);
  auto* rlidar = app.add_subcommand("render-lidar", "Render LiDAR sweeps of a scene from a pose list");
  rlidar->add_option("config", config, "Render config (JSON)")->required();
  add_common_options(rlidar, opts);

  auto* sim = app.add_subcommand("simulate", "Run a crowd + robot simulation and write every sensor frame");
  sim->add_option("manifest", config, "Simulation manifest (JSON)")->required();
  add_common_options(sim, opts);

  std::string pred;
  std::string gt;
  std::string kind = "rgb";
  auto* eval = app.add_subcommand("eval", "Compare predictions against ground truth");
  eval->add_option("pred", pred, "Prediction directory (or TUM file for trajectories)")->required();
  eval->add_option("gt", gt, "Ground-truth directory (or TUM file)")->required();
  eval->add_option("--kind", kind, "rgb, depth or trajectory")->check(CLI::IsMember({"rgb", "depth", "trajectory"}));
  add_common_options(eval, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  set_default_threads(opts.threads);
  try {
    if (*synth) {
      return cmd_make_synthetic(config, opts);
    }
    if (*train_cmd) {
      return cmd_train(config, opts);
    }
    if (*rcam) {
      return cmd_render(RenderKind::kCamera, config, opts);
    }
    if (*rdepth) {
      return cmd_render(RenderKind::kDepth, config, opts);
    }
    if (*rlidar) {
      return cmd_render(RenderKind::kLidar, config, opts);
    }
    if (*sim) {
      return cmd_simulate(config, opts);
    }
    return cmd_eval(pred, gt, kind, opts);
  } catch (const ConfigError& e) {
    std::cerr << "nerfsim: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "nerfsim: invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "nerfsim: " << e.what() << '\n';
    return kExitRuntime;
  }
}
