// evmc: event-volume motion compensation toolbox.
//
// Subcommands: voxelize, deblur, loss, fit-flow, fit-egomotion, synth,
// eval-flow, eval-pose, render. Machine-readable outputs are JSON; images are
// PGM/PPM. EVMC_THREADS caps internal parallelism (0 = single-threaded).

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "evmc/egomotion.hpp"
#include "evmc/io.hpp"
#include "evmc/losses.hpp"
#include "evmc/metrics.hpp"
#include "evmc/optimize.hpp"
#include "evmc/synth.hpp"
#include "evmc/types.hpp"
#include "evmc/voxel.hpp"
#include "evmc/warp.hpp"

namespace {

using nlohmann::json;

std::pair<int, int> parse_size(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) throw CLI::ValidationError("--size", "expected HxW, e.g. 256x256");
  const int h = std::stoi(text.substr(0, x));
  const int w = std::stoi(text.substr(x + 1));
  if (h < 1 || w < 1) throw CLI::ValidationError("--size", "dimensions must be positive");
  return {h, w};
}

std::vector<double> parse_csv_doubles(const std::string& text, std::size_t expect,
                                      const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  if (out.size() != expect)
    throw CLI::ValidationError(flag, "expected " + std::to_string(expect) + " comma-separated values");
  return out;
}

evmc::EventFormat detect_format(const std::string& path, const std::string& override_fmt) {
  if (override_fmt == "csv") return evmc::EventFormat::Csv;
  if (override_fmt == "binary") return evmc::EventFormat::Binary;
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".bin") return evmc::EventFormat::Binary;
  return evmc::EventFormat::Csv;
}

evmc::EventSlice load_slice(const std::string& path, const std::string& fmt) {
  auto loaded = evmc::load_events(path, detect_format(path, fmt));
  for (const auto& warning : loaded.warnings) std::cerr << "warning: " << warning << "\n";
  return std::move(loaded.slice);
}

json pose_to_json(const evmc::Pose& pose) {
  return json{{"psi", pose.psi},        {"beta", pose.beta},
              {"phi", pose.phi},        {"tx", pose.translation.x()},
              {"ty", pose.translation.y()}, {"tz", pose.translation.z()}};
}

evmc::Pose pose_from_json(const json& j) {
  evmc::Pose pose;
  pose.psi = j.at("psi").get<double>();
  pose.beta = j.at("beta").get<double>();
  pose.phi = j.at("phi").get<double>();
  pose.translation =
      evmc::Vec3(j.at("tx").get<double>(), j.at("ty").get<double>(), j.at("tz").get<double>());
  return pose;
}

json report_to_json(const evmc::LossReport& report) {
  return json::parse(evmc::to_json(report));
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error(path + ": write failed");
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open");
  json j;
  in >> j;
  return j;
}

evmc::MotionModel model_from_json(const json& j) {
  evmc::MotionModel model;
  model.kind = evmc::parse_model_kind(j.at("kind").get<std::string>());
  const auto params = j.at("params").get<std::vector<double>>();
  model.params = Eigen::Map<const Eigen::VectorXd>(params.data(),
                                                   static_cast<Eigen::Index>(params.size()));
  if (model.params.size() != evmc::param_count(model.kind))
    throw std::runtime_error("model JSON: parameter count does not match kind");
  return model;
}

json model_to_json(const evmc::MotionModel& model) {
  json j;
  j["kind"] = evmc::model_kind_name(model.kind);
  j["params"] = std::vector<double>(model.params.data(), model.params.data() + model.params.size());
  return j;
}

evmc::StereoRig rig_or_default(const std::string& calib_path, int height, int width) {
  if (!calib_path.empty()) {
    auto loaded = evmc::load_calibration(calib_path);
    for (const auto& warning : loaded.warnings) std::cerr << "warning: " << warning << "\n";
    return loaded.rig;
  }
  evmc::StereoRig rig;
  rig.left = evmc::default_intrinsics(height, width);
  rig.right = rig.left;
  rig.baseline_m = 0.1;
  return rig;
}

// Expands either a dense flow file or a model JSON to a dense field.
evmc::FlowField flow_from_args(const std::string& flow_path, const std::string& model_path,
                               const std::string& flow_const, int height, int width,
                               const evmc::StereoRig& rig, int bins) {
  if (!flow_path.empty()) return evmc::read_flow_binary(flow_path);
  if (!model_path.empty()) {
    const evmc::MotionModel model = model_from_json(read_json(model_path));
    return evmc::expand_model(model, height, width, rig.left, rig.baseline_m, bins);
  }
  if (!flow_const.empty()) {
    const auto uv = parse_csv_doubles(flow_const, 2, "--flow-const");
    return evmc::FlowField::constant(height, width, uv[0], uv[1]);
  }
  throw std::runtime_error("need one of --flow, --model or --flow-const");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"event-volume motion compensation toolbox"};
  app.require_subcommand(1);

  std::string events_path, right_events_path, format = "auto", calib_path;
  std::string flow_path, model_path, flow_const, out_path, out_prefix, pred_path, gt_path;
  std::string size_text = "256x256", kind_text, t_prime_text = "start", weights_text,
              init_text, pose_text, flow_text;
  int bins = 9;
  long max_events = 30000;
  std::string pgm_prefix;
  double lambda1 = 1.0, eps = evmc::kDefaultCharbonnierEps;
  int census_window = evmc::kDefaultCensusWindow;
  int max_iters = 500;
  double tolerance = 1e-7;
  std::uint64_t seed = 0;
  int n_sources = 40, events_per_source = 50;
  double noise_rate = 0.0, duration = 1.0, depth_m = 10.0, disparity_px = 4.0;
  bool stereo = false, with_variance = false;

  auto* voxelize = app.add_subcommand("voxelize", "build and export a discretized event volume");
  voxelize->add_option("--events", events_path)->required();
  voxelize->add_option("--format", format)->check(CLI::IsMember({"auto", "csv", "binary"}));
  voxelize->add_option("--bins", bins);
  voxelize->add_option("--size", size_text);
  voxelize->add_option("--max-events", max_events, "keep at most this many events");
  voxelize->add_option("--out", out_path)->required();
  voxelize->add_option("--pgm-prefix", pgm_prefix, "also write per-bin PGM images");

  auto* deblur = app.add_subcommand("deblur", "emit count and timestamp images under a flow");
  deblur->add_option("--events", events_path)->required();
  deblur->add_option("--format", format)->check(CLI::IsMember({"auto", "csv", "binary"}));
  deblur->add_option("--flow", flow_path);
  deblur->add_option("--model", model_path);
  deblur->add_option("--flow-const", flow_const);
  deblur->add_option("--t-prime", t_prime_text)->check(CLI::IsMember({"start", "end"}));
  deblur->add_option("--bins", bins);
  deblur->add_option("--size", size_text);
  deblur->add_option("--calib", calib_path);
  deblur->add_option("--out-prefix", out_prefix)->required();

  auto* loss = app.add_subcommand("loss", "print the flow loss report as JSON");
  loss->add_option("--events", events_path)->required();
  loss->add_option("--format", format)->check(CLI::IsMember({"auto", "csv", "binary"}));
  loss->add_option("--flow", flow_path);
  loss->add_option("--model", model_path);
  loss->add_option("--flow-const", flow_const);
  loss->add_option("--weights", weights_text, "lambda1,lambda2,lambda3,lambda4");
  loss->add_option("--bins", bins);
  loss->add_option("--size", size_text);
  loss->add_option("--eps", eps);
  loss->add_flag("--with-variance", with_variance, "also report the variance objective");
  loss->add_option("--out", out_path, "write the report here as well");

  auto* fit_flow = app.add_subcommand("fit-flow", "fit a parametric flow model");
  fit_flow->add_option("--events", events_path)->required();
  fit_flow->add_option("--format", format)->check(CLI::IsMember({"auto", "csv", "binary"}));
  fit_flow->add_option("--kind", kind_text, "constant|affine")->required();
  fit_flow->add_option("--bins", bins);
  fit_flow->add_option("--size", size_text);
  fit_flow->add_option("--lambda1", lambda1);
  fit_flow->add_option("--eps", eps);
  fit_flow->add_option("--max-iters", max_iters);
  fit_flow->add_option("--tol", tolerance);
  fit_flow->add_option("--seed", seed);
  fit_flow->add_option("--init", init_text, "comma-separated initial parameters");
  fit_flow->add_option("--out", out_path)->required();

  auto* fit_ego = app.add_subcommand("fit-egomotion", "fit a rotation or rigid motion model");
  fit_ego->add_option("--events", events_path)->required();
  fit_ego->add_option("--right-events", right_events_path);
  fit_ego->add_option("--format", format)->check(CLI::IsMember({"auto", "csv", "binary"}));
  fit_ego->add_option("--kind", kind_text, "rotation|rigid")->required();
  fit_ego->add_option("--calib", calib_path);
  fit_ego->add_flag("--stereo", stereo, "enable the stereo census objective");
  fit_ego->add_option("--bins", bins);
  fit_ego->add_option("--size", size_text);
  fit_ego->add_option("--weights", weights_text, "lambda1,lambda2,lambda3,lambda4");
  fit_ego->add_option("--eps", eps);
  fit_ego->add_option("--census-window", census_window);
  fit_ego->add_option("--max-iters", max_iters);
  fit_ego->add_option("--tol", tolerance);
  fit_ego->add_option("--seed", seed);
  fit_ego->add_option("--init", init_text);
  fit_ego->add_option("--out", out_path)->required();

  auto* synth = app.add_subcommand("synth", "generate a synthetic scene with ground truth");
  synth->add_option("--kind", kind_text, "constant|rigid|stereo")->required();
  synth->add_option("--out-prefix", out_prefix)->required();
  synth->add_option("--seed", seed);
  synth->add_option("--sources", n_sources);
  synth->add_option("--events-per-source", events_per_source);
  synth->add_option("--noise-rate", noise_rate, "spurious events per second");
  synth->add_option("--duration", duration);
  synth->add_option("--bins", bins);
  synth->add_option("--size", size_text);
  synth->add_option("--flow", flow_text, "u,v in pixels/bin");
  synth->add_option("--pose", pose_text, "psi,beta,phi,tx,ty,tz");
  synth->add_option("--depth", depth_m);
  synth->add_option("--disparity", disparity_px);
  synth->add_option("--calib", calib_path);
  synth->add_option("--format", format)->check(CLI::IsMember({"auto", "csv", "binary"}));

  auto* eval_flow = app.add_subcommand("eval-flow", "AEE / outlier metrics against ground truth");
  eval_flow->add_option("--pred", pred_path, "flow .bin or fit .json")->required();
  eval_flow->add_option("--gt", gt_path, "flow .bin or ground-truth .json")->required();
  eval_flow->add_option("--events", events_path, "restrict to pixels with at least one event");
  eval_flow->add_option("--format", format)->check(CLI::IsMember({"auto", "csv", "binary"}));
  eval_flow->add_option("--size", size_text);
  eval_flow->add_option("--bins", bins);
  eval_flow->add_option("--out", out_path);

  auto* eval_pose = app.add_subcommand("eval-pose", "RPE / RRE against a ground-truth pose");
  eval_pose->add_option("--pred", pred_path, "fit .json")->required();
  eval_pose->add_option("--gt", gt_path, "ground-truth .json")->required();
  eval_pose->add_option("--out", out_path);

  auto* render = app.add_subcommand("render", "direction-coded flow image");
  render->add_option("--flow", flow_path);
  render->add_option("--model", model_path);
  render->add_option("--size", size_text);
  render->add_option("--bins", bins);
  render->add_option("--out", out_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const auto [height, width] = parse_size(size_text);

    if (voxelize->parsed()) {
      evmc::EventSlice slice = load_slice(events_path, format);
      if (max_events > 0 && static_cast<long>(slice.size()) > max_events) {
        slice.events.resize(static_cast<std::size_t>(max_events));
        slice = evmc::EventSlice::from_events(std::move(slice.events));
      }
      const evmc::EventVolume vol = evmc::build_volume(slice, bins, height, width);
      evmc::write_volume_binary(out_path, vol);
      if (!pgm_prefix.empty())
        for (int b = 0; b < vol.bins; ++b)
          evmc::write_pgm(pgm_prefix + "_bin" + std::to_string(b) + ".pgm",
                          vol.data[static_cast<std::size_t>(b)]);
      std::cout << "wrote " << out_path << " (" << vol.bins << "x" << vol.height << "x"
                << vol.width << ", dropped " << vol.dropped_events << " events)\n";
      return 0;
    }

    if (deblur->parsed()) {
      const evmc::EventSlice slice = load_slice(events_path, format);
      const evmc::StereoRig rig = rig_or_default(calib_path, height, width);
      const evmc::FlowField flow =
          flow_from_args(flow_path, model_path, flow_const, height, width, rig, bins);
      const double t_prime = t_prime_text == "start" ? 0.0 : static_cast<double>(bins - 1);
      const evmc::WarpedEvents warped = evmc::propagate_events(slice, flow, t_prime, bins);
      const evmc::Image counts = evmc::count_image(warped, height, width);
      const evmc::TimestampImages stamps = evmc::timestamp_images(warped, height, width);
      evmc::write_pgm(out_prefix + "_count.pgm", counts);
      evmc::write_image_binary(out_prefix + "_count.bin", counts);
      evmc::write_pgm(out_prefix + "_tplus.pgm", stamps.t_plus);
      evmc::write_pgm(out_prefix + "_tminus.pgm", stamps.t_minus);
      std::cout << "wrote " << out_prefix << "_{count,tplus,tminus}\n";
      return 0;
    }

    if (loss->parsed()) {
      const evmc::EventSlice slice = load_slice(events_path, format);
      const evmc::StereoRig rig = rig_or_default(calib_path, height, width);
      const evmc::FlowField flow =
          flow_from_args(flow_path, model_path, flow_const, height, width, rig, bins);
      evmc::LossWeights weights;
      if (!weights_text.empty()) {
        const auto w = parse_csv_doubles(weights_text, 4, "--weights");
        weights = {w[0], w[1], w[2], w[3]};
      }
      evmc::LossReport report =
          evmc::total_flow_loss(slice, flow, bins, weights.lambda1, eps);
      report.weights = weights;
      json j = report_to_json(report);
      if (with_variance) {
        const evmc::WarpedEvents warped = evmc::propagate_events(slice, flow, 0.0, bins);
        j["extras"]["variance"] = evmc::variance_loss(warped, height, width);
      }
      std::cout << j.dump(2) << "\n";
      if (!out_path.empty()) write_json(out_path, j);
      return 0;
    }

    if (fit_flow->parsed() || fit_ego->parsed()) {
      const evmc::EventSlice slice = load_slice(events_path, format);
      evmc::EventSlice right_slice;
      evmc::FitProblem problem;
      problem.events = &slice;
      problem.bins = bins;
      problem.height = height;
      problem.width = width;
      problem.rig = rig_or_default(calib_path, height, width);
      if (!right_events_path.empty()) {
        right_slice = load_slice(right_events_path, format);
        problem.right_events = &right_slice;
        problem.stereo_loss = stereo;
      }

      evmc::ModelKind model_kind = evmc::parse_model_kind(kind_text);
      if (fit_flow->parsed() && model_kind != evmc::ModelKind::ConstantFlow &&
          model_kind != evmc::ModelKind::AffineFlow)
        throw std::runtime_error("fit-flow handles constant|affine; use fit-egomotion");
      if (fit_ego->parsed() && model_kind != evmc::ModelKind::RotationOnly &&
          model_kind != evmc::ModelKind::RigidPlanar)
        throw std::runtime_error("fit-egomotion handles rotation|rigid; use fit-flow");

      evmc::OptimizeConfig config;
      config.max_iters = max_iters;
      config.tolerance = tolerance;
      config.seed = seed;
      config.charbonnier_eps = eps;
      config.census_window = census_window;
      config.weights.lambda1 = lambda1;
      if (!weights_text.empty()) {
        const auto w = parse_csv_doubles(weights_text, 4, "--weights");
        config.weights = {w[0], w[1], w[2], w[3]};
      }
      if (fit_ego->parsed()) config.weights.lambda1 = 0.0;  // parametric flow, no smooth term

      evmc::MotionModel init = evmc::MotionModel::zero(model_kind);
      if (!init_text.empty()) {
        const auto vals = parse_csv_doubles(init_text, static_cast<std::size_t>(init.params.size()),
                                            "--init");
        for (Eigen::Index i = 0; i < init.params.size(); ++i) init.params[i] = vals[static_cast<std::size_t>(i)];
      } else if (problem.stereo_loss) {
        // Seed the inverse depth from a census sweep over integer disparities.
        const int d0 = evmc::best_integer_disparity(slice, right_slice, height, width, bins,
                                                    std::min(width / 4, 32), census_window, eps);
        if (d0 > 0)
          init.params[6] =
              static_cast<double>(d0) / (problem.rig.left.fx * problem.rig.baseline_m);
      }

      const evmc::FitResult result = evmc::fit(init, problem, config);
      json j = model_to_json(result.model);
      j["converged"] = result.converged;
      j["iterations"] = result.iterations;
      j["trace"] = result.trace;
      j["report"] = report_to_json(result.report);
      if (model_kind == evmc::ModelKind::ConstantFlow)
        j["flow"] = {{"u", result.model.params[0]}, {"v", result.model.params[1]}};
      if (model_kind == evmc::ModelKind::RotationOnly || model_kind == evmc::ModelKind::RigidPlanar) {
        evmc::Pose pose;
        pose.psi = result.model.params[0];
        pose.beta = result.model.params[1];
        pose.phi = result.model.params[2];
        if (model_kind == evmc::ModelKind::RigidPlanar) {
          pose.translation = evmc::Vec3(result.model.params[3], result.model.params[4],
                                        result.model.params[5]);
          j["inverse_depth"] = result.model.params[6];
          j["disparity_px"] =
              result.model.params[6] * problem.rig.left.fx * problem.rig.baseline_m;
        }
        j["pose"] = pose_to_json(pose);
      }
      write_json(out_path, j);
      std::cout << "wrote " << out_path << " (loss " << result.trace.back() << " after "
                << result.iterations << " steps)\n";
      return 0;
    }

    if (synth->parsed()) {
      evmc::SynthScene scene;
      scene.seed = seed;
      scene.n_sources = n_sources;
      scene.events_per_source = events_per_source;
      scene.duration_s = duration;
      scene.noise_rate = noise_rate;
      scene.bins = bins;
      scene.height = height;
      scene.width = width;
      const evmc::EventFormat fmt = detect_format(".csv", format == "binary" ? "binary" : "csv");
      const std::string ext = fmt == evmc::EventFormat::Binary ? ".bin" : ".csv";

      json gt;
      gt["bins"] = bins;
      gt["height"] = height;
      gt["width"] = width;
      gt["seed"] = seed;

      if (kind_text == "constant") {
        if (!flow_text.empty()) {
          const auto uv = parse_csv_doubles(flow_text, 2, "--flow");
          scene.flow = evmc::Vec2(uv[0], uv[1]);
        }
        const evmc::ConstantFlowScene generated = evmc::gen_constant_flow(scene);
        evmc::save_events(out_prefix + "_events" + ext, generated.slice, fmt);
        gt["kind"] = "constant_flow";
        gt["flow"] = {{"u", generated.flow.x()}, {"v", generated.flow.y()}};
      } else if (kind_text == "rigid") {
        scene.motion = evmc::SynthScene::Motion::Rigid;
        if (!pose_text.empty()) {
          const auto p = parse_csv_doubles(pose_text, 6, "--pose");
          scene.pose.psi = p[0];
          scene.pose.beta = p[1];
          scene.pose.phi = p[2];
          scene.pose.translation = evmc::Vec3(p[3], p[4], p[5]);
        }
        scene.depth_m = depth_m;
        scene.intrinsics = rig_or_default(calib_path, height, width).left;
        const evmc::RigidScene generated = evmc::gen_rigid(scene);
        evmc::save_events(out_prefix + "_events" + ext, generated.slice, fmt);
        gt["kind"] = "rigid";
        gt["pose"] = pose_to_json(generated.pose_gt);
        gt["depth_m"] = generated.depth_m;
      } else if (kind_text == "stereo") {
        if (!flow_text.empty()) {
          const auto uv = parse_csv_doubles(flow_text, 2, "--flow");
          scene.flow = evmc::Vec2(uv[0], uv[1]);
        }
        const evmc::StereoRig rig = rig_or_default(calib_path, height, width);
        const evmc::StereoScene generated =
            evmc::gen_stereo_pair(scene, rig, disparity_px, seed);
        evmc::save_events(out_prefix + "_left" + ext, generated.left, fmt);
        evmc::save_events(out_prefix + "_right" + ext, generated.right, fmt);
        gt["kind"] = "stereo";
        gt["flow"] = {{"u", scene.flow.x()}, {"v", scene.flow.y()}};
        gt["disparity_px"] = generated.disparity_px;
      } else {
        throw std::runtime_error("synth --kind must be constant|rigid|stereo");
      }
      write_json(out_prefix + "_gt.json", gt);
      std::cout << "wrote " << out_prefix << "_gt.json\n";
      return 0;
    }

    if (eval_flow->parsed()) {
      const evmc::StereoRig rig = rig_or_default(calib_path, height, width);
      auto load_field = [&](const std::string& path) -> evmc::FlowField {
        if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
          const json j = read_json(path);
          if (j.contains("flow"))
            return evmc::FlowField::constant(height, width, j["flow"]["u"].get<double>(),
                                             j["flow"]["v"].get<double>());
          return evmc::expand_model(model_from_json(j), height, width, rig.left,
                                    rig.baseline_m, bins);
        }
        return evmc::read_flow_binary(path);
      };
      const evmc::FlowField pred = load_field(pred_path);
      const evmc::FlowField gt = load_field(gt_path);
      evmc::MaskImage mask = evmc::MaskImage::Constant(pred.u.rows(), pred.u.cols(), 1);
      if (!events_path.empty()) {
        const evmc::EventSlice slice = load_slice(events_path, format);
        const evmc::FlowField zero(pred.height(), pred.width());
        const evmc::Image counts = evmc::count_image(
            evmc::propagate_events(slice, zero, 0.0, bins), pred.height(), pred.width());
        mask = (counts > 0.0).cast<std::uint8_t>();
      }
      const evmc::FlowError err = evmc::aee(pred, gt, mask);
      json j{{"aee", err.aee}, {"outlier_fraction", err.outlier_fraction}, {"pixels", err.pixels}};
      std::cout << j.dump(2) << "\n";
      std::printf("AEE %.4f   %%Outlier %.2f\n", err.aee, 100.0 * err.outlier_fraction);
      if (!out_path.empty()) write_json(out_path, j);
      return 0;
    }

    if (eval_pose->parsed()) {
      const json pred = read_json(pred_path);
      const json gt = read_json(gt_path);
      const evmc::Pose pose_pred = pose_from_json(pred.contains("pose") ? pred["pose"] : pred);
      const evmc::Pose pose_gt = pose_from_json(gt.contains("pose") ? gt["pose"] : gt);
      const evmc::Mat3 r_pred =
          evmc::euler_to_rotation(pose_pred.psi, pose_pred.beta, pose_pred.phi);
      const evmc::Mat3 r_gt = evmc::euler_to_rotation(pose_gt.psi, pose_gt.beta, pose_gt.phi);
      json j;
      j["rre_rad"] = evmc::rre(r_pred, r_gt);
      if (pose_pred.translation.norm() > 0.0 && pose_gt.translation.norm() > 0.0) {
        const double angle = evmc::rpe(pose_pred.translation, pose_gt.translation);
        j["rpe_rad"] = angle;
        j["rpe_deg"] = angle * 180.0 / M_PI;
      } else {
        j["rpe_rad"] = nullptr;
        j["rpe_deg"] = nullptr;
      }
      std::cout << j.dump(2) << "\n";
      if (!out_path.empty()) write_json(out_path, j);
      return 0;
    }

    if (render->parsed()) {
      const evmc::StereoRig rig = rig_or_default(calib_path, height, width);
      const evmc::FlowField flow =
          flow_from_args(flow_path, model_path, "", height, width, rig, bins);
      evmc::write_flow_ppm(out_path, flow);
      std::cout << "wrote " << out_path << "\n";
      return 0;
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
