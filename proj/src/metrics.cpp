#include "evmc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evmc {

FlowField flow_to_displacement(const FlowField& flow, int bins, double dt_s,
                               double window_s) {
  if (window_s <= 0.0)
    throw std::invalid_argument("flow_to_displacement: window duration must be positive");
  if (dt_s <= 0.0) throw std::invalid_argument("flow_to_displacement: dt must be positive");
  if (bins < 2) throw std::invalid_argument("flow_to_displacement: need bins >= 2");
  const double scale = (bins - 1) * dt_s / window_s;
  FlowField out = flow;
  out.u *= scale;
  out.v *= scale;
  return out;
}

FlowError aee(const FlowField& pred, const FlowField& gt, const MaskImage& mask) {
  const int h = pred.height(), w = pred.width();
  if (gt.height() != h || gt.width() != w || mask.rows() != h || mask.cols() != w)
    throw std::invalid_argument("aee: dimensions must match");
  FlowError out;
  double sum = 0.0;
  std::int64_t outliers = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask(y, x) == 0) continue;
      const double du = pred.u(y, x) - gt.u(y, x);
      const double dv = pred.v(y, x) - gt.v(y, x);
      const double err = std::hypot(du, dv);
      sum += err;
      if (err > kOutlierThresholdPx) ++outliers;
      ++out.pixels;
    }
  }
  if (out.pixels == 0) throw std::invalid_argument("aee: empty mask, mean undefined");
  out.aee = sum / static_cast<double>(out.pixels);
  out.outlier_fraction = static_cast<double>(outliers) / static_cast<double>(out.pixels);
  return out;
}

std::vector<std::optional<double>> depth_error(const Image& pred_depth_m,
                                               const Image& gt_depth_m,
                                               const MaskImage& event_mask,
                                               const std::vector<double>& thresholds_m) {
  const int h = static_cast<int>(pred_depth_m.rows());
  const int w = static_cast<int>(pred_depth_m.cols());
  if (gt_depth_m.rows() != h || gt_depth_m.cols() != w || event_mask.rows() != h ||
      event_mask.cols() != w)
    throw std::invalid_argument("depth_error: dimensions must match");
  std::vector<std::optional<double>> out(thresholds_m.size());
  for (std::size_t k = 0; k < thresholds_m.size(); ++k) {
    double sum = 0.0;
    std::int64_t count = 0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (event_mask(y, x) == 0 || gt_depth_m(y, x) > thresholds_m[k]) continue;
        sum += std::abs(pred_depth_m(y, x) - gt_depth_m(y, x));
        ++count;
      }
    }
    if (count > 0) out[k] = sum / static_cast<double>(count);
  }
  return out;
}

double rpe(const Vec3& t_pred, const Vec3& t_gt) {
  const double np = t_pred.norm(), ng = t_gt.norm();
  if (np == 0.0 || ng == 0.0)
    throw std::invalid_argument("rpe: zero-norm translation has no direction");
  const double c = std::clamp(t_pred.dot(t_gt) / (np * ng), -1.0, 1.0);
  return std::acos(c);
}

namespace {

void check_rotation(const Mat3& r, const char* what) {
  const double ortho = ((r.transpose() * r) - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho > 1e-6 || r.determinant() < 0.0)
    throw std::invalid_argument(std::string(what) + ": input is not a rotation matrix");
}

}  // namespace

Mat3 rotation_log(const Mat3& rotation) {
  check_rotation(rotation, "rotation_log");
  const double cos_theta = std::clamp((rotation.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double theta = std::acos(cos_theta);
  const Mat3 skew = (rotation - rotation.transpose()) / 2.0;

  if (theta < 1e-7) return skew;  // log R ~ (R - R^T)/2 to first order
  if (theta > M_PI - 1e-5) {
    // Near pi the skew part vanishes; recover the axis from the diagonal.
    Vec3 axis;
    for (int i = 0; i < 3; ++i)
      axis[i] = std::sqrt(std::max(0.0, (rotation(i, i) + 1.0) / 2.0));
    // Fix relative signs from the symmetric off-diagonal products.
    int k = 0;
    for (int i = 1; i < 3; ++i)
      if (axis[i] > axis[k]) k = i;
    for (int i = 0; i < 3; ++i) {
      if (i == k) continue;
      const double sym = (rotation(k, i) + rotation(i, k)) / 2.0;
      if (sym < 0.0) axis[i] = -axis[i];
    }
    axis.normalize();
    const Vec3 w = theta * axis;
    Mat3 out;
    out << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
    return out;
  }
  return (theta / (2.0 * std::sin(theta))) * (rotation - rotation.transpose());
}

double rre(const Mat3& r_pred, const Mat3& r_gt) {
  check_rotation(r_pred, "rre");
  check_rotation(r_gt, "rre");
  return rotation_log(r_pred.transpose() * r_gt).norm();
}

}  // namespace evmc
