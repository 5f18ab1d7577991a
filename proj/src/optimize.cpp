#include "evmc/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "evmc/egomotion.hpp"
#include "evmc/voxel.hpp"
#include "evmc/warp.hpp"

namespace evmc {

int param_count(ModelKind kind) {
  switch (kind) {
    case ModelKind::ConstantFlow: return 2;
    case ModelKind::AffineFlow: return 6;
    case ModelKind::RotationOnly: return 3;
    case ModelKind::RigidPlanar: return 7;
  }
  throw std::invalid_argument("param_count: unknown model kind");
}

const char* model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::ConstantFlow: return "constant_flow";
    case ModelKind::AffineFlow: return "affine_flow";
    case ModelKind::RotationOnly: return "rotation_only";
    case ModelKind::RigidPlanar: return "rigid_planar";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "constant_flow" || name == "constant") return ModelKind::ConstantFlow;
  if (name == "affine_flow" || name == "affine") return ModelKind::AffineFlow;
  if (name == "rotation_only" || name == "rotation") return ModelKind::RotationOnly;
  if (name == "rigid_planar" || name == "rigid") return ModelKind::RigidPlanar;
  throw std::invalid_argument("parse_model_kind: unknown kind '" + name + "'");
}

MotionModel MotionModel::zero(ModelKind kind) {
  MotionModel m;
  m.kind = kind;
  m.params = Eigen::VectorXd::Zero(param_count(kind));
  if (kind == ModelKind::RigidPlanar) m.params[6] = 0.1;  // inverse depth: 10 m plane
  return m;
}

namespace {

constexpr double kMinInverseDepth = 1e-6;

Pose pose_from_params(const Eigen::VectorXd& p) {
  Pose pose;
  pose.psi = p[0];
  pose.beta = p[1];
  pose.phi = p[2];
  if (p.size() >= 6) pose.translation = Vec3(p[3], p[4], p[5]);
  return pose;
}

void check_params(const MotionModel& model, const char* where) {
  if (model.params.size() != param_count(model.kind))
    throw std::invalid_argument(std::string(where) + ": parameter count does not match kind");
}

}  // namespace

FlowField expand_model(const MotionModel& model, int height, int width,
                       const CameraIntrinsics& intr, double baseline_m, int bins) {
  check_params(model, "expand_model");
  const Eigen::VectorXd& p = model.params;
  switch (model.kind) {
    case ModelKind::ConstantFlow:
      return FlowField::constant(height, width, p[0], p[1]);
    case ModelKind::AffineFlow: {
      intr.validate();
      FlowField flow(height, width);
      for (int y = 0; y < height; ++y) {
        const double yc = y - intr.cy;
        for (int x = 0; x < width; ++x) {
          const double xc = x - intr.cx;
          flow.u(y, x) = p[0] * xc + p[1] * yc + p[4];
          flow.v(y, x) = p[2] * xc + p[3] * yc + p[5];
        }
      }
      return flow;
    }
    case ModelKind::RotationOnly: {
      intr.validate();
      const Pose pose{p[0], p[1], p[2], Vec3::Zero()};
      // Depth cancels under projection when T = 0; any positive plane works.
      return pose_depth_to_flow(pose, Image::Constant(height, width, 1.0), intr, bins).flow;
    }
    case ModelKind::RigidPlanar: {
      intr.validate();
      (void)baseline_m;
      const Pose pose = pose_from_params(p);
      const double depth = 1.0 / std::max(p[6], kMinInverseDepth);
      return pose_depth_to_flow(pose, Image::Constant(height, width, depth), intr, bins).flow;
    }
  }
  throw std::invalid_argument("expand_model: unknown model kind");
}

// ---------------------------------------------------------------------------
// Adjoint of the deblurring losses with respect to the dense flow field.
// ---------------------------------------------------------------------------

namespace {

struct FlowAdjoint {
  double loss = 0.0;
  Image du, dv;
};

struct EventSample {
  // Bilinear flow-lookup footprint at the original event position.
  int x0, y0, x1, y1;
  double w00, w01, w10, w11;
  double u, v;  // sampled flow
};

EventSample make_sample(const FlowField& flow, double x, double y) {
  const int h = flow.height(), w = flow.width();
  const double xc = std::clamp(x, 0.0, static_cast<double>(w - 1));
  const double yc = std::clamp(y, 0.0, static_cast<double>(h - 1));
  int x0 = static_cast<int>(std::floor(xc));
  int y0 = static_cast<int>(std::floor(yc));
  if (x0 > w - 2) x0 = std::max(0, w - 2);
  if (y0 > h - 2) y0 = std::max(0, h - 2);
  EventSample s;
  s.x0 = x0;
  s.y0 = y0;
  s.x1 = std::min(x0 + 1, w - 1);
  s.y1 = std::min(y0 + 1, h - 1);
  const double fx = xc - x0, fy = yc - y0;
  s.w00 = (1 - fx) * (1 - fy);
  s.w01 = fx * (1 - fy);
  s.w10 = (1 - fx) * fy;
  s.w11 = fx * fy;
  s.u = s.w00 * flow.u(s.y0, s.x0) + s.w01 * flow.u(s.y0, s.x1) + s.w10 * flow.u(s.y1, s.x0) +
        s.w11 * flow.u(s.y1, s.x1);
  s.v = s.w00 * flow.v(s.y0, s.x0) + s.w01 * flow.v(s.y0, s.x1) + s.w10 * flow.v(s.y1, s.x0) +
        s.w11 * flow.v(s.y1, s.x1);
  return s;
}

// Forward + reverse pass of time_loss_at for one reference time. Accumulates
// d(sum T^2)/d(flow) into the adjoint via the chain rule through the kernel
// rasterization: T = num/den per polarity, w = k(px-x') k(py-y').
void time_loss_adjoint_at(const EventSlice& slice, const std::vector<double>& t_star,
                          const std::vector<EventSample>& samples, const FlowField& flow,
                          double t_prime, int bins, FlowAdjoint& adj) {
  const int h = flow.height(), w = flow.width();
  const std::size_t n = slice.size();
  const double inv_span = 1.0 / (bins - 1);

  std::vector<double> wx(n), wy(n);
  Image num_plus = Image::Zero(h, w), den_plus = Image::Zero(h, w);
  Image num_minus = Image::Zero(h, w), den_minus = Image::Zero(h, w);

  for (std::size_t i = 0; i < n; ++i) {
    const double alpha = t_prime - t_star[i];
    wx[i] = slice.events[i].x + alpha * samples[i].u;
    wy[i] = slice.events[i].y + alpha * samples[i].v;
    const double s = t_star[i] * inv_span;
    Image& num = slice.events[i].p > 0 ? num_plus : num_minus;
    Image& den = slice.events[i].p > 0 ? den_plus : den_minus;
    const int px0 = static_cast<int>(std::floor(wx[i]));
    const int py0 = static_cast<int>(std::floor(wy[i]));
    for (int dy = 0; dy <= 1; ++dy) {
      const int py = py0 + dy;
      if (py < 0 || py >= h) continue;
      const double ky = bilinear_kernel(py - wy[i]);
      if (ky == 0.0) continue;
      for (int dx = 0; dx <= 1; ++dx) {
        const int px = px0 + dx;
        if (px < 0 || px >= w) continue;
        const double weight = bilinear_kernel(px - wx[i]) * ky;
        if (weight == 0.0) continue;
        num(py, px) += weight * s;
        den(py, px) += weight;
      }
    }
  }

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (den_plus(y, x) > kZeroWeightEps) {
        const double t = num_plus(y, x) / den_plus(y, x);
        adj.loss += t * t;
      }
      if (den_minus(y, x) > kZeroWeightEps) {
        const double t = num_minus(y, x) / den_minus(y, x);
        adj.loss += t * t;
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const double alpha = t_prime - t_star[i];
    if (alpha == 0.0) continue;
    const double s = t_star[i] * inv_span;
    const Image& num = slice.events[i].p > 0 ? num_plus : num_minus;
    const Image& den = slice.events[i].p > 0 ? den_plus : den_minus;
    const int px0 = static_cast<int>(std::floor(wx[i]));
    const int py0 = static_cast<int>(std::floor(wy[i]));
    double dldx = 0.0, dldy = 0.0;
    for (int dy = 0; dy <= 1; ++dy) {
      const int py = py0 + dy;
      if (py < 0 || py >= h) continue;
      const double ay = py - wy[i];
      const double ky = bilinear_kernel(ay);
      for (int dx = 0; dx <= 1; ++dx) {
        const int px = px0 + dx;
        if (px < 0 || px >= w) continue;
        const double ax = px - wx[i];
        const double kx = bilinear_kernel(ax);
        const double d = den(py, px);
        if (d <= kZeroWeightEps) continue;
        const double t = num(py, px) / d;
        const double common = 2.0 * t * (s - t) / d;  // dL/dw for this event's weight
        dldx += common * (-bilinear_kernel_grad(ax)) * ky;
        dldy += common * kx * (-bilinear_kernel_grad(ay));
      }
    }
    const double dldu = alpha * dldx;
    const double dldv = alpha * dldy;
    const EventSample& smp = samples[i];
    adj.du(smp.y0, smp.x0) += smp.w00 * dldu;
    adj.du(smp.y0, smp.x1) += smp.w01 * dldu;
    adj.du(smp.y1, smp.x0) += smp.w10 * dldu;
    adj.du(smp.y1, smp.x1) += smp.w11 * dldu;
    adj.dv(smp.y0, smp.x0) += smp.w00 * dldv;
    adj.dv(smp.y0, smp.x1) += smp.w01 * dldv;
    adj.dv(smp.y1, smp.x0) += smp.w10 * dldv;
    adj.dv(smp.y1, smp.x1) += smp.w11 * dldv;
  }
}

FlowAdjoint time_loss_adjoint(const EventSlice& slice, const FlowField& flow, int bins) {
  if (bins < 2) throw std::invalid_argument("time_loss_adjoint: need bins >= 2");
  FlowAdjoint adj;
  adj.du = Image::Zero(flow.height(), flow.width());
  adj.dv = Image::Zero(flow.height(), flow.width());
  const ScaledTimestamps scaled = scale_timestamps(slice, bins);
  std::vector<EventSample> samples(slice.size());
  for (std::size_t i = 0; i < slice.size(); ++i)
    samples[i] = make_sample(flow, slice.events[i].x, slice.events[i].y);
  time_loss_adjoint_at(slice, scaled.t_star, samples, flow, 0.0, bins, adj);
  time_loss_adjoint_at(slice, scaled.t_star, samples, flow, static_cast<double>(bins - 1),
                       bins, adj);
  return adj;
}

// Adds weight * d(smoothness)/d(channel) and the weighted loss value.
void smoothness_adjoint(const Image& channel, double eps, double weight, Image& grad,
                        double& loss) {
  const int h = static_cast<int>(channel.rows());
  const int w = static_cast<int>(channel.cols());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x + 1 < w; ++x) {
      const double d = channel(y, x) - channel(y, x + 1);
      loss += weight * charbonnier(d, eps);
      const double g = weight * charbonnier_grad(d, eps);
      grad(y, x) += g;
      grad(y, x + 1) -= g;
    }
  }
  for (int y = 0; y + 1 < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double d = channel(y, x) - channel(y + 1, x);
      loss += weight * charbonnier(d, eps);
      const double g = weight * charbonnier_grad(d, eps);
      grad(y, x) += g;
      grad(y + 1, x) -= g;
    }
  }
}

// ---------------------------------------------------------------------------
// Per-pixel jacobians of the rigid flow wrt pose / inverse depth.
// ---------------------------------------------------------------------------

struct RigidChain {
  Mat3 rot;
  Mat3 drot[3];  // d R / d psi, beta, phi
  Vec3 translation;
  double inv_depth;
};

RigidChain make_rigid_chain(const Eigen::VectorXd& p, bool has_translation) {
  RigidChain c;
  const double psi = p[0], beta = p[1], phi = p[2];
  const double cx = std::cos(psi), sx = std::sin(psi);
  const double cy = std::cos(beta), sy = std::sin(beta);
  const double cz = std::cos(phi), sz = std::sin(phi);
  Mat3 rx, ry, rz, drx, dry, drz;
  rx << 1, 0, 0, 0, cx, -sx, 0, sx, cx;
  ry << cy, 0, sy, 0, 1, 0, -sy, 0, cy;
  rz << cz, -sz, 0, sz, cz, 0, 0, 0, 1;
  drx << 0, 0, 0, 0, -sx, -cx, 0, cx, -sx;
  dry << -sy, 0, cy, 0, 0, 0, -cy, 0, -sy;
  drz << -sz, -cz, 0, cz, -sz, 0, 0, 0, 0;
  c.rot = rz * ry * rx;
  c.drot[0] = rz * ry * drx;
  c.drot[1] = rz * dry * rx;
  c.drot[2] = drz * ry * rx;
  c.translation = has_translation ? Vec3(p[3], p[4], p[5]) : Vec3::Zero();
  c.inv_depth = has_translation ? std::max(p[6], kMinInverseDepth) : 1.0;
  return c;
}

// Contracts dL/dflow with the geometric jacobian of the reprojection flow.
Eigen::VectorXd contract_rigid(const Eigen::VectorXd& p, ModelKind kind,
                               const CameraIntrinsics& intr, int bins, const Image& dldu,
                               const Image& dldv) {
  const bool rigid = kind == ModelKind::RigidPlanar;
  const RigidChain chain = make_rigid_chain(p, rigid);
  const double depth = 1.0 / chain.inv_depth;
  const int h = static_cast<int>(dldu.rows());
  const int w = static_cast<int>(dldu.cols());
  const double inv_span = 1.0 / (bins - 1);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(p.size());

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gu = dldu(y, x), gv = dldv(y, x);
      if (gu == 0.0 && gv == 0.0) continue;
      const Vec3 ray = intr.unproject(x, y);
      const Vec3 q = depth * ray;
      const Vec3 pt = chain.rot * q + chain.translation;
      if (pt.z() <= kMinDepthM) continue;  // guard pixel: flow held at 0
      const double inv_z = 1.0 / pt.z();
      const double au = intr.fx * inv_span * inv_z;
      const double av = intr.fy * inv_span * inv_z;
      const Vec3 dxdp(au, 0.0, -au * pt.x() * inv_z);
      const Vec3 dydp(0.0, av, -av * pt.y() * inv_z);
      auto add = [&](int idx, const Vec3& dpt) {
        grad[idx] += gu * dxdp.dot(dpt) + gv * dydp.dot(dpt);
      };
      for (int j = 0; j < 3; ++j) add(j, chain.drot[j] * q);
      if (rigid) {
        add(3, Vec3::UnitX());
        add(4, Vec3::UnitY());
        add(5, Vec3::UnitZ());
        // q = ray / rho; d q / d rho = -ray / rho^2.
        add(6, chain.rot * (-depth * depth) * ray);
      }
    }
  }
  return grad;
}

// ---------------------------------------------------------------------------
// Stereo (census) objective pieces.
// ---------------------------------------------------------------------------

// d(census half loss)/d(uniform disparity of the reference camera), census
// entries held fixed; only the sampling position differentiates.
double census_half_grad(const CensusImage& ref, const CensusImage& other,
                        double disp_uniform, double sign, double eps) {
  const int h = ref.height(), w = ref.width();
  double grad = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double xs = x + sign * disp_uniform;
      if (xs < 0.0 || xs > w - 1) continue;
      int j = static_cast<int>(std::floor(xs));
      if (j > w - 2) j = w - 2;
      if (j < 0) j = 0;
      const double f = xs - j;
      for (std::size_t e = 0; e < ref.planes.size(); ++e) {
        const Image& plane = other.planes[e];
        const double sampled = (1.0 - f) * plane(y, j) + f * plane(y, j + 1);
        const double slope = plane(y, j + 1) - plane(y, j);
        const double delta = ref.planes[e](y, x) - sampled;
        grad += charbonnier_grad(delta, eps) * (-sign) * slope;
      }
    }
  }
  return grad;
}

struct StereoEval {
  LossReport report;
  Eigen::VectorXd gradient;  // empty unless requested
};

StereoEval eval_stereo(const MotionModel& model, const FitProblem& problem,
                       const OptimizeConfig& config, bool with_gradient) {
  if (model.kind != ModelKind::RigidPlanar)
    throw std::invalid_argument("stereo objective requires the rigid_planar model");
  if (problem.right_events == nullptr)
    throw std::invalid_argument("stereo objective requires right-camera events");
  problem.rig.validate();

  const Eigen::VectorXd& p = model.params;
  const Pose pose = pose_from_params(p);
  const double rho = std::max(p[6], kMinInverseDepth);
  const int h = problem.height, w = problem.width;
  const int bins = problem.bins;
  const double eps = config.charbonnier_eps;

  const double disp_l = problem.rig.left.fx * problem.rig.baseline_m * rho;
  const double disp_r = problem.rig.right.fx * problem.rig.baseline_m * rho;
  const DisparityField dl = Image::Constant(h, w, disp_l);
  const DisparityField dr = Image::Constant(h, w, disp_r);

  StereoEval out;
  out.report = total_sfm_loss(*problem.events, *problem.right_events, pose, dl, dr,
                              problem.rig, bins, config.weights, eps, config.census_window);
  if (!with_gradient) return out;

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(7);

  // Temporal term through each camera's reprojection flow.
  for (int side = 0; side < 2; ++side) {
    const EventSlice& slice = side == 0 ? *problem.events : *problem.right_events;
    const CameraIntrinsics& intr = side == 0 ? problem.rig.left : problem.rig.right;
    const FlowField flow =
        pose_disparity_to_flow(pose, side == 0 ? dl : dr, intr, problem.rig.baseline_m, bins)
            .flow;
    const FlowAdjoint adj = time_loss_adjoint(slice, flow, bins);
    grad += contract_rigid(p, ModelKind::RigidPlanar, intr, bins, adj.du, adj.dv);
  }

  // Census term: gradient flows through the disparity used for sampling only
  // (the sign descriptors are data). d disparity / d rho = fx * baseline.
  {
    const FlowField flow_l =
        pose_disparity_to_flow(pose, dl, problem.rig.left, problem.rig.baseline_m, bins).flow;
    const FlowField flow_r =
        pose_disparity_to_flow(pose, dr, problem.rig.right, problem.rig.baseline_m, bins).flow;
    const Image count_l = count_image(propagate_events(*problem.events, flow_l, 0.0, bins), h, w);
    const Image count_r =
        count_image(propagate_events(*problem.right_events, flow_r, 0.0, bins), h, w);
    const CensusImage census_l = census_transform(count_l, config.census_window);
    const CensusImage census_r = census_transform(count_r, config.census_window);
    const double g_dl = census_half_grad(census_l, census_r, disp_l, -1.0, eps);
    const double g_dr = census_half_grad(census_r, census_l, disp_r, +1.0, eps);
    grad[6] += config.weights.lambda2 * (g_dl * problem.rig.left.fx * problem.rig.baseline_m +
                                         g_dr * problem.rig.right.fx * problem.rig.baseline_m);
  }

  // Consistency between the two uniform disparities (zero when fx matches).
  {
    const double delta = disp_l - disp_r;
    const double ddelta_drho =
        (problem.rig.left.fx - problem.rig.right.fx) * problem.rig.baseline_m;
    if (ddelta_drho != 0.0) {
      std::int64_t valid_l = 0, valid_r = 0;
      for (int x = 0; x < w; ++x) {
        if (x - disp_l >= 0.0 && x - disp_l <= w - 1) ++valid_l;
        if (x + disp_r >= 0.0 && x + disp_r <= w - 1) ++valid_r;
      }
      const double g = charbonnier_grad(delta, eps) * ddelta_drho * static_cast<double>(h) *
                       static_cast<double>(valid_l + valid_r);
      grad[6] += config.weights.lambda3 * g;
    }
  }
  // Disparity smoothness of uniform fields has zero gradient.

  out.gradient = std::move(grad);
  return out;
}

LossReport eval_mono(const MotionModel& model, const FitProblem& problem,
                     const OptimizeConfig& config) {
  const FlowField flow = expand_model(model, problem.height, problem.width, problem.rig.left,
                                      problem.rig.baseline_m, problem.bins);
  return total_flow_loss(*problem.events, flow, problem.bins, config.weights.lambda1,
                         config.charbonnier_eps);
}

}  // namespace

LossReport objective_report(const MotionModel& model, const FitProblem& problem,
                            const OptimizeConfig& config) {
  check_params(model, "objective_report");
  if (problem.events == nullptr)
    throw std::invalid_argument("objective_report: events must be set");
  if (problem.stereo_loss) return eval_stereo(model, problem, config, false).report;
  return eval_mono(model, problem, config);
}

double objective_value(const MotionModel& model, const FitProblem& problem,
                       const OptimizeConfig& config) {
  return objective_report(model, problem, config).total;
}

Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& objective,
                                 const Eigen::VectorXd& params, double h) {
  if (h <= 0.0) throw std::invalid_argument("numeric_gradient: h must be positive");
  Eigen::VectorXd grad(params.size());
  Eigen::VectorXd probe = params;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    probe[i] = params[i] + h;
    const double fp = objective(probe);
    probe[i] = params[i] - h;
    const double fm = objective(probe);
    probe[i] = params[i];
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw std::runtime_error("numeric_gradient: non-finite objective at coordinate " +
                               std::to_string(i));
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

Eigen::VectorXd analytic_gradient(const MotionModel& model, const FitProblem& problem,
                                  const OptimizeConfig& config) {
  check_params(model, "analytic_gradient");
  if (problem.events == nullptr)
    throw std::invalid_argument("analytic_gradient: events must be set");
  if (problem.stereo_loss) return eval_stereo(model, problem, config, true).gradient;

  const FlowField flow = expand_model(model, problem.height, problem.width, problem.rig.left,
                                      problem.rig.baseline_m, problem.bins);
  FlowAdjoint adj = time_loss_adjoint(*problem.events, flow, problem.bins);
  if (config.weights.lambda1 > 0.0) {
    smoothness_adjoint(flow.u, config.charbonnier_eps, config.weights.lambda1, adj.du, adj.loss);
    smoothness_adjoint(flow.v, config.charbonnier_eps, config.weights.lambda1, adj.dv, adj.loss);
  }

  const int h = problem.height, w = problem.width;
  switch (model.kind) {
    case ModelKind::ConstantFlow: {
      Eigen::VectorXd g(2);
      g << adj.du.sum(), adj.dv.sum();
      return g;
    }
    case ModelKind::AffineFlow: {
      Eigen::VectorXd g = Eigen::VectorXd::Zero(6);
      for (int y = 0; y < h; ++y) {
        const double yc = y - problem.rig.left.cy;
        for (int x = 0; x < w; ++x) {
          const double xc = x - problem.rig.left.cx;
          g[0] += adj.du(y, x) * xc;
          g[1] += adj.du(y, x) * yc;
          g[2] += adj.dv(y, x) * xc;
          g[3] += adj.dv(y, x) * yc;
          g[4] += adj.du(y, x);
          g[5] += adj.dv(y, x);
        }
      }
      return g;
    }
    case ModelKind::RotationOnly:
    case ModelKind::RigidPlanar:
      return contract_rigid(model.params, model.kind, problem.rig.left, problem.bins, adj.du,
                            adj.dv);
  }
  throw std::invalid_argument("analytic_gradient: unknown model kind");
}

namespace {

// Characteristic per-parameter magnitudes; finite-difference probes and step
// scaling operate in these units.
Eigen::VectorXd param_scales(ModelKind kind, const FitProblem& problem) {
  switch (kind) {
    case ModelKind::ConstantFlow:
      return Eigen::Vector2d(1.0, 1.0);  // pixels/bin
    case ModelKind::AffineFlow: {
      // Linear coefficients reach ~1 px/bin at the frame edge.
      const double a = 2.0 / std::max(problem.width, problem.height);
      Eigen::VectorXd s(6);
      s << a, a, a, a, 1.0, 1.0;
      return s;
    }
    case ModelKind::RotationOnly:
      return Eigen::Vector3d(0.01, 0.01, 0.01);  // radians
    case ModelKind::RigidPlanar: {
      Eigen::VectorXd s(7);
      s << 0.01, 0.01, 0.01, 0.1, 0.1, 0.1, 0.01;  // rad, meters, 1/m
      return s;
    }
  }
  throw std::invalid_argument("param_scales: unknown model kind");
}

}  // namespace

FitResult fit(const MotionModel& init, const FitProblem& problem, const OptimizeConfig& config) {
  check_params(init, "fit");
  if (config.max_iters < 1) throw std::invalid_argument("fit: max_iters must be >= 1");
  if (config.tolerance <= 0.0) throw std::invalid_argument("fit: tolerance must be positive");

  MotionModel model = init;
  double loss = objective_value(model, problem, config);
  if (!std::isfinite(loss))
    throw std::runtime_error("fit: non-finite loss at the initial parameters");

  FitResult result;
  result.trace.push_back(loss);

  const Eigen::VectorXd scales = param_scales(model.kind, problem);
  Eigen::VectorXd rms = Eigen::VectorXd::Zero(model.params.size());
  double step = config.initial_step;
  double fd_h = config.fd_initial;

  MotionModel probe = model;
  auto smoothed_gradient = [&](const Eigen::VectorXd& at) {
    Eigen::VectorXd grad(at.size());
    for (Eigen::Index i = 0; i < at.size(); ++i) {
      const double h = fd_h * scales[i];
      probe.params = at;
      probe.params[i] = at[i] + h;
      const double fp = objective_value(probe, problem, config);
      probe.params[i] = at[i] - h;
      const double fm = objective_value(probe, problem, config);
      if (!std::isfinite(fp) || !std::isfinite(fm))
        throw std::runtime_error("fit: non-finite loss probing coordinate " + std::to_string(i));
      grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
  };

  for (int iter = 0; iter < config.max_iters; ++iter) {
    const Eigen::VectorXd grad = smoothed_gradient(model.params);
    if (!grad.allFinite())
      throw std::runtime_error("fit: non-finite gradient at iteration " + std::to_string(iter));

    bool accepted = false;
    double new_loss = loss;
    double alpha = step;
    MotionModel candidate = model;
    if (!grad.isZero(0.0)) {
      rms = config.rms_decay * rms + (1.0 - config.rms_decay) * grad.cwiseProduct(grad);
      const Eigen::VectorXd direction =
          (-grad.cwiseQuotient(rms.cwiseSqrt().array().max(config.rms_floor).matrix()))
              .cwiseProduct(scales);
      const double slope = grad.dot(direction);  // negative by construction
      while (alpha >= config.min_step) {
        candidate.params = model.params + alpha * direction;
        const double f = objective_value(candidate, problem, config);
        if (std::isfinite(f) && f <= loss + config.armijo_c * alpha * slope) {
          accepted = true;
          new_loss = f;
          break;
        }
        alpha *= config.step_shrink;
      }
    }

    if (!accepted) {
      // No descent at this smoothing level; refine the probe step and retry.
      if (fd_h <= config.fd_floor) {
        result.converged = true;
        break;
      }
      fd_h = std::max(fd_h * config.fd_anneal, config.fd_floor);
      step = std::max(step * config.fd_anneal, config.initial_step * config.fd_floor);
      continue;
    }

    model.params = candidate.params;
    const double decrease = loss - new_loss;
    loss = new_loss;
    result.trace.push_back(loss);
    ++result.iterations;
    step = std::min(alpha * config.step_growth, config.max_step);

    const double rel = decrease / std::max(std::abs(loss) + decrease, 1e-300);
    if (rel < config.tolerance) {
      if (fd_h <= config.fd_floor) {
        result.converged = true;
        break;
      }
      fd_h = std::max(fd_h * config.fd_anneal, config.fd_floor);
    }
  }

  result.model = std::move(model);
  result.report = objective_report(result.model, problem, config);
  return result;
}

int best_integer_disparity(const EventSlice& left, const EventSlice& right, int height,
                           int width, int bins, int max_disparity, int census_window,
                           double eps) {
  const FlowField zero(height, width);
  const Image count_l = count_image(propagate_events(left, zero, 0.0, bins), height, width);
  const Image count_r = count_image(propagate_events(right, zero, 0.0, bins), height, width);
  int best = 0;
  double best_loss = std::numeric_limits<double>::infinity();
  for (int d = 0; d <= max_disparity; ++d) {
    const DisparityField disp = Image::Constant(height, width, static_cast<double>(d));
    const double loss = census_stereo_loss(count_l, count_r, disp, disp, census_window, eps);
    if (loss < best_loss) {
      best_loss = loss;
      best = d;
    }
  }
  return best;
}

}  // namespace evmc
