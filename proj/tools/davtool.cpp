// Copyright 2026 The davkit Authors.
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

// davtool: command-line front end for depth-attention volumes, plane
// extraction, losses and depth evaluation.
//
// Exit codes: 0 success, 1 failed gradient check, 2 missing or unreadable
// input, 3 degenerate input, 4 configuration error, 5 divergence.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "davkit/errors.hpp"
#include "davkit/geometry.hpp"
#include "davkit/gradient_check.hpp"
#include "davkit/io.hpp"
#include "davkit/metrics.hpp"
#include "davkit/plane_detection.hpp"
#include "davkit/synth.hpp"
#include "davkit/training.hpp"
#include "davkit/volume.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kInputError = 2,
  kDegenerate = 3,
  kConfig = 4,
  kDivergence = 5,
};

struct GlobalFlags {
  std::uint64_t seed = 0;
  std::string variant = "literal";
  int factor = 8;
  int max_planes = 5;
  double inlier_threshold = 0.01;
  double min_coverage = 0.07;
  int max_iter = 100;
  int threads = 0;

  dav::RansacConfig ransac() const {
    dav::RansacConfig cfg;
    cfg.inlier_threshold = inlier_threshold;
    cfg.max_iterations = max_iter;
    cfg.max_planes = max_planes;
    cfg.min_coverage = min_coverage;
    cfg.seed = seed;
    return cfg;
  }

  dav::DavConfig dav() const {
    dav::DavConfig cfg;
    cfg.ransac = ransac();
    cfg.factor = factor;
    cfg.variant = dav::parse_variant(variant);
    return cfg;
  }
};

// Parses "AxB" or "AxBxC" into positive integers.
std::vector<int> parse_dims(const std::string& text, std::size_t count) {
  std::vector<int> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = text.find('x', start);
    const std::string part = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
    try {
      std::size_t used = 0;
      const int v = std::stoi(part, &used);
      if (used != part.size() || v <= 0) throw std::invalid_argument(part);
      out.push_back(v);
    } catch (const std::exception&) {
      throw dav::ConfigurationError("invalid size '" + text + "'");
    }
    if (end == std::string::npos) break;
    start = end + 1;
  }
  if (out.size() != count) throw dav::ConfigurationError("expected " + std::to_string(count) + " dimensions in '" + text + "'");
  return out;
}

std::pair<int, int> parse_point(const std::string& text) {
  const std::size_t comma = text.find(',');
  try {
    if (comma == std::string::npos) throw std::invalid_argument(text);
    return {std::stoi(text.substr(0, comma)), std::stoi(text.substr(comma + 1))};
  } catch (const std::exception&) {
    throw dav::ConfigurationError("expected x,y but got '" + text + "'");
  }
}

int run_synth(const GlobalFlags& g, int planes, const std::string& size, double noise, const std::string& out,
              const std::string& planes_out, const std::string& labels_out, const std::string& intrinsics_out) {
  const auto dims = parse_dims(size, 2);
  const dav::CameraIntrinsics camera = dav::default_camera(dims[0], dims[1]);
  dav::SceneSpec spec = dav::make_room(g.seed, planes, camera);
  spec.noise_sigma = noise;
  const dav::LabeledScene scene = dav::render(spec);

  dav::write_pfm(scene.depth, out);
  if (!planes_out.empty()) {
    std::vector<dav::PlaneRecord> records;
    const auto coverage = scene.coverage();
    for (std::size_t i = 0; i < spec.planes.size(); ++i)
      records.push_back({spec.planes[i], static_cast<std::size_t>((scene.labels == static_cast<int>(i)).count()),
                         coverage[i]});
    dav::write_file(planes_out, dav::planes_to_json(records));
  }
  if (!labels_out.empty()) dav::write_labels(scene.labels, labels_out);
  if (!intrinsics_out.empty()) dav::write_file(intrinsics_out, dav::intrinsics_to_json(camera));
  return kOk;
}

int run_gen_dav(const GlobalFlags& g, const std::string& depth_path, const std::string& intrinsics_path,
                const std::string& out, const std::string& attn_map, const std::string& map_out,
                const std::string& planes_out) {
  const dav::DepthMap depth = dav::read_pfm(depth_path);
  if (!intrinsics_path.empty()) {
    const dav::CameraIntrinsics camera = dav::read_intrinsics(intrinsics_path);
    if (camera.width != depth.width() || camera.height != depth.height())
      throw dav::ConfigurationError("intrinsics size does not match the depth map");
  }
  const dav::DavConfig cfg = g.dav();
  const dav::GroundTruthDav result = dav::ground_truth_dav(depth, cfg);
  dav::write_dav(result.volume, out);
  if (!planes_out.empty()) dav::write_file(planes_out, dav::planes_to_json(dav::to_records(result.planes)));
  if (!attn_map.empty()) {
    if (map_out.empty()) throw dav::ConfigurationError("--attn-map needs --map-out");
    const auto [x, y] = parse_point(attn_map);
    const Eigen::ArrayXXd slice = dav::attention_slice(result.volume, y, x);
    dav::write_heatmap(slice, {0.0, dav::max_score(cfg.variant), dav::Colormap::WarmCool}, map_out);
  }
  std::cerr << "DAV " << result.volume.h << "x" << result.volume.w << " from " << result.planes.size()
            << " plane(s)\n";
  return kOk;
}

int run_fit_planes(const GlobalFlags& g, const std::string& depth_path, const std::string& intrinsics_path,
                   const std::string& out) {
  const dav::DepthMap depth = dav::read_pfm(depth_path);
  const dav::CameraIntrinsics camera = dav::read_intrinsics(intrinsics_path);
  const auto points = dav::back_project(depth, camera);
  const auto planes = dav::extract_planes(points, depth.pixel_count(), g.ransac());
  dav::write_file(out, dav::planes_to_json(dav::to_records(planes)));
  std::cerr << planes.size() << " plane(s) extracted\n";
  return kOk;
}

int run_eval(const std::string& pred_path, const std::string& gt_path, const std::string& planes_path,
             const std::string& intrinsics_path, const std::string& report_path, const std::string& heatmap_path,
             double edge_threshold, double reference) {
  const dav::DepthMap pred = dav::read_pfm(pred_path);
  const dav::DepthMap gt = dav::read_pfm(gt_path);
  dav::EvaluationOptions options;
  options.edge_threshold = edge_threshold;
  options.reference_depth = reference;
  if (!intrinsics_path.empty()) options.camera = dav::read_intrinsics(intrinsics_path);
  if (!planes_path.empty()) {
    if (!options.camera) throw dav::ConfigurationError("--planes needs --intrinsics");
    const Eigen::ArrayXXi labels = dav::read_pgm(planes_path);
    if (labels.rows() != gt.height() || labels.cols() != gt.width())
      throw dav::ConfigurationError("plane label image size does not match the depth maps");
    std::map<int, std::vector<int>> regions;
    for (int v = 0; v < labels.rows(); ++v)
      for (int u = 0; u < labels.cols(); ++u)
        if (labels(v, u) != 255) regions[labels(v, u)].push_back(v * gt.width() + u);
    for (auto& [label, pixels] : regions) options.regions.push_back(std::move(pixels));
  }
  const dav::MetricsReport report = dav::evaluate(pred, gt, options);
  if (!report_path.empty()) dav::write_file(report_path, dav::report_to_json(report));
  if (!heatmap_path.empty()) {
    const dav::Mask mask = dav::evaluation_mask(pred, gt);
    const Eigen::ArrayXXd error = mask.select((pred.values() - gt.values()).abs(), 0.0);
    const double top = error.maxCoeff();
    dav::write_heatmap(error, {0.0, top > 0.0 ? top : 1.0, dav::Colormap::Grayscale}, heatmap_path);
  }
  std::printf("REL %.6f  RMSE %.6f  d1 %.4f  d2 %.4f  d3 %.4f  e0 %.2f%%\n", report.rel, report.rmse, report.delta1,
              report.delta2, report.delta3, report.eps_0);
  return kOk;
}

int run_grad_check(const GlobalFlags& g, double eps, const std::string& shape, double tolerance,
                   const std::string& corrupt) {
  const auto dims = parse_dims(shape, 3);
  dav::GradCheckOptions options;
  options.h = dims[0];
  options.w = dims[1];
  options.block.c_in = dims[2];
  options.step = eps;
  options.tolerance = tolerance;
  options.seed = g.seed;
  if (!corrupt.empty()) options.corrupt_tensor = corrupt;
  const dav::GradCheckReport report = dav::check_block_gradients(options);
  std::printf("%-20s %8s %14s %14s %14s  %s\n", "tensor", "size", "|analytic|", "|numeric|", "rel_error",
              "result");
  for (const auto& t : report.tensors)
    std::printf("%-20s %8ld %14.6e %14.6e %14.6e  %s\n", t.name.c_str(), static_cast<long>(t.size),
                t.analytic_norm, t.numeric_norm, t.relative_error, t.passed ? "PASS" : "FAIL");
  std::printf("%s\n", report.passed ? "all gradients PASS" : "gradient check FAILED");
  return report.passed ? kOk : kCheckFailed;
}

int run_toy_train(const GlobalFlags& g, const std::string& scene_path, int steps, double lr,
                  const std::string& trace_out, const std::string& params_out) {
  const dav::DepthMap scene = dav::read_pfm(scene_path);
  dav::ToyTrainConfig cfg;
  cfg.dav = g.dav();
  cfg.steps = steps;
  cfg.learning_rate = lr;
  cfg.seed = g.seed;
  const dav::ToyTrainResult result = dav::toy_train(scene, cfg);
  if (!trace_out.empty()) dav::write_file(trace_out, dav::trace_to_csv(result.trace));
  if (!params_out.empty()) dav::write_params(result.params, cfg.block, params_out);
  std::cerr << "L_attention " << result.trace.front() << " -> " << result.trace.back() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Depth-attention volumes, plane extraction and depth evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalFlags g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--variant", g.variant, "DAV score variant")
      ->check(CLI::IsMember({"literal", "rescaled"}))
      ->capture_default_str();
  app.add_option("--factor", g.factor, "DAV subsampling factor")->capture_default_str();
  app.add_option("--max-planes", g.max_planes, "Planes per image")->capture_default_str();
  app.add_option("--inlier-threshold", g.inlier_threshold, "RANSAC inlier threshold")->capture_default_str();
  app.add_option("--min-coverage", g.min_coverage, "Minimum plane coverage")->capture_default_str();
  app.add_option("--max-iter", g.max_iter, "RANSAC iterations")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")->capture_default_str();

  int synth_planes = 3;
  std::string synth_size = "120x160", synth_out, synth_planes_out, synth_labels_out, synth_intrinsics_out;
  double synth_noise = 0.0;
  auto* synth = app.add_subcommand("synth", "Render a synthetic planar room");
  synth->add_option("--planes", synth_planes, "Number of planes")->capture_default_str();
  synth->add_option("--size", synth_size, "Image size HxW")->capture_default_str();
  synth->add_option("--noise", synth_noise, "Gaussian depth noise (m)")->capture_default_str();
  synth->add_option("--out", synth_out, "Depth PFM")->required();
  synth->add_option("--planes-out", synth_planes_out, "Generator plane list");
  synth->add_option("--labels-out", synth_labels_out, "Plane label PGM");
  synth->add_option("--intrinsics-out", synth_intrinsics_out, "Camera intrinsics");

  std::string dav_depth, dav_intrinsics, dav_out, dav_attn, dav_map_out, dav_planes_out;
  auto* gen_dav = app.add_subcommand("gen-dav", "Ground-truth depth-attention volume");
  gen_dav->add_option("--depth", dav_depth, "Depth PFM")->required();
  gen_dav->add_option("--intrinsics", dav_intrinsics, "Camera intrinsics");
  gen_dav->add_option("--out", dav_out, "DAV binary")->required();
  gen_dav->add_option("--attn-map", dav_attn, "Query cell x,y on the subsampled grid");
  gen_dav->add_option("--map-out", dav_map_out, "Attention map image");
  gen_dav->add_option("--planes-out", dav_planes_out, "Detected image-space planes");

  std::string fit_depth, fit_intrinsics, fit_out;
  auto* fit = app.add_subcommand("fit-planes", "Sequential RANSAC plane extraction");
  fit->add_option("--depth", fit_depth, "Depth PFM")->required();
  fit->add_option("--intrinsics", fit_intrinsics, "Camera intrinsics")->required();
  fit->add_option("--out", fit_out, "Plane list")->required();

  std::string eval_pred, eval_gt, eval_planes, eval_intrinsics, eval_report, eval_heatmap;
  double edge_threshold = 0.5;
  double reference = 3.0;
  auto* eval = app.add_subcommand("eval", "Depth evaluation metrics");
  eval->add_option("--pred", eval_pred, "Predicted depth PFM")->required();
  eval->add_option("--gt", eval_gt, "Ground-truth depth PFM")->required();
  eval->add_option("--planes", eval_planes, "Annotated plane labels (PGM, 255 = none)");
  eval->add_option("--intrinsics", eval_intrinsics, "Camera intrinsics");
  eval->add_option("--report", eval_report, "Metrics report");
  eval->add_option("--heatmap", eval_heatmap, "Absolute error image");
  eval->add_option("--edge-threshold", edge_threshold, "Sobel edge threshold")->capture_default_str();
  eval->add_option("--reference-depth", reference, "Directed-error reference depth")->capture_default_str();

  double gc_eps = 1e-5;
  double gc_tol = 1e-4;
  std::string gc_shape = "4x4x8", gc_corrupt;
  auto* grad = app.add_subcommand("grad-check", "Finite-difference check of the attention block");
  grad->add_option("--eps", gc_eps, "Central-difference step")->capture_default_str();
  grad->add_option("--shape", gc_shape, "Feature shape HxWxC")->capture_default_str();
  grad->add_option("--tolerance", gc_tol, "Maximum relative error")->capture_default_str();
  grad->add_option("--corrupt", gc_corrupt, "Scale one analytic gradient (negative control)")->group("");

  std::string train_scene, train_trace, train_params;
  int train_steps = 200;
  double train_lr = 3.0;
  auto* train = app.add_subcommand("toy-train", "Fit the DAV predictor to one scene");
  train->add_option("--scene", train_scene, "Depth PFM")->required();
  train->add_option("--steps", train_steps, "Gradient steps")->capture_default_str();
  train->add_option("--lr", train_lr, "Learning rate")->capture_default_str();
  train->add_option("--trace-out", train_trace, "Loss trace (step,value)");
  train->add_option("--params-out", train_params, "Trained parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (g.threads < 0) throw dav::ConfigurationError("--threads must be >= 0");
    if (g.threads > 0) Eigen::setNbThreads(g.threads);
    if (*synth)
      return run_synth(g, synth_planes, synth_size, synth_noise, synth_out, synth_planes_out, synth_labels_out,
                       synth_intrinsics_out);
    if (*gen_dav) return run_gen_dav(g, dav_depth, dav_intrinsics, dav_out, dav_attn, dav_map_out, dav_planes_out);
    if (*fit) return run_fit_planes(g, fit_depth, fit_intrinsics, fit_out);
    if (*eval)
      return run_eval(eval_pred, eval_gt, eval_planes, eval_intrinsics, eval_report, eval_heatmap, edge_threshold,
                      reference);
    if (*grad) return run_grad_check(g, gc_eps, gc_shape, gc_tol, gc_corrupt);
    if (*train) return run_toy_train(g, train_scene, train_steps, train_lr, train_trace, train_params);
  } catch (const dav::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const dav::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const dav::DegenerateInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDegenerate;
  } catch (const dav::DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDivergence;
  } catch (const dav::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  }
  return kConfig;
}
