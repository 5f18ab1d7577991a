#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "evmc/losses.hpp"
#include "evmc/types.hpp"

namespace evmc {

/// Parametric stand-ins for a dense flow prediction.
enum class ModelKind {
  ConstantFlow,  // (u0, v0)
  AffineFlow,    // (a00, a01, a10, a11, tx, ty) about the principal point
  RotationOnly,  // (psi, beta, phi)
  RigidPlanar,   // (psi, beta, phi, Tx, Ty, Tz, inv_depth)
};

int param_count(ModelKind kind);
const char* model_kind_name(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

struct MotionModel {
  ModelKind kind = ModelKind::ConstantFlow;
  Eigen::VectorXd params;

  static MotionModel zero(ModelKind kind);
};

struct OptimizeConfig {
  int max_iters = 500;
  double tolerance = 1e-7;  // relative loss decrease
  double initial_step = 1.0;
  double step_growth = 1.5;
  double step_shrink = 0.5;
  double armijo_c = 1e-4;
  double min_step = 1e-14;
  double max_step = 1e6;
  double rms_decay = 0.9;  // per-parameter step scaling accumulator
  double rms_floor = 1e-8;
  std::uint64_t seed = 0;

  // Smoothing schedule for the fit gradient. The deblurring losses carry
  // their descent partly in raster support changes that the pointwise
  // derivative cannot see, so fit differentiates through central differences
  // whose probe step anneals from fd_initial down to fd_floor (in units of
  // the per-parameter scales of the model kind).
  double fd_initial = 1.0;
  double fd_floor = 1e-3;
  double fd_anneal = 0.5;

  LossWeights weights;
  double charbonnier_eps = kDefaultCharbonnierEps;
  int census_window = kDefaultCensusWindow;
};

/// Data and geometry one fit runs against. A non-null `right` together with
/// `stereo_loss` switches the objective from L_time + lambda1 L_smooth to the
/// stereo SFM total (rigid_planar only, disparity derived from inv_depth).
struct FitProblem {
  const EventSlice* events = nullptr;
  const EventSlice* right_events = nullptr;
  StereoRig rig;
  int bins = 9;
  int height = 0;
  int width = 0;
  bool stereo_loss = false;
};

/// Dense flow for any model kind; rigid kinds go through the egomotion
/// reprojection with a uniform depth plane.
FlowField expand_model(const MotionModel& model, int height, int width,
                       const CameraIntrinsics& intr, double baseline_m, int bins);

double objective_value(const MotionModel& model, const FitProblem& problem,
                       const OptimizeConfig& config);
LossReport objective_report(const MotionModel& model, const FitProblem& problem,
                            const OptimizeConfig& config);

/// Central differences (f(p + h e_i) - f(p - h e_i)) / 2h. Throws, naming the
/// coordinate, if the objective is non-finite at a probe point.
Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& objective,
                                 const Eigen::VectorXd& params, double h);

/// Exact gradient of the configured objective via the chain rule through the
/// kernel rasterization (and the projection, for rigid kinds). At kernel kinks
/// the fixed subgradient convention of bilinear_kernel_grad applies.
Eigen::VectorXd analytic_gradient(const MotionModel& model, const FitProblem& problem,
                                  const OptimizeConfig& config);

struct FitResult {
  MotionModel model;
  std::vector<double> trace;  // accepted losses, starting at the initial value
  int iterations = 0;
  bool converged = false;
  LossReport report;
};

/// Momentum-free adaptive gradient descent with backtracking line search.
/// The trace is non-increasing; a non-finite loss or gradient aborts with a
/// diagnostic.
FitResult fit(const MotionModel& init, const FitProblem& problem,
              const OptimizeConfig& config);

/// Census-loss sweep over integer disparities on raw (unwarped) count images;
/// seeds the inverse-depth parameter for stereo fits.
int best_integer_disparity(const EventSlice& left, const EventSlice& right,
                           int height, int width, int bins, int max_disparity,
                           int census_window, double eps);

}  // namespace evmc
