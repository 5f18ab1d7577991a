#include "evmc/egomotion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evmc {

Mat3 euler_to_rotation(double psi, double beta, double phi) {
  const double cx = std::cos(psi), sx = std::sin(psi);
  const double cy = std::cos(beta), sy = std::sin(beta);
  const double cz = std::cos(phi), sz = std::sin(phi);
  Mat3 rx, ry, rz;
  rx << 1, 0, 0, 0, cx, -sx, 0, sx, cx;
  ry << cy, 0, sy, 0, 1, 0, -sy, 0, cy;
  rz << cz, -sz, 0, sz, cz, 0, 0, 0, 1;
  return rz * ry * rx;
}

Vec3 rotation_to_euler(const Mat3& r) {
  const double beta = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  const double psi = std::atan2(r(2, 1), r(2, 2));
  const double phi = std::atan2(r(1, 0), r(0, 0));
  return {psi, beta, phi};
}

double disparity_to_depth(double disparity_px, double focal_px, double baseline_m,
                          bool* clamped) {
  if (focal_px <= 0.0 || baseline_m <= 0.0)
    throw std::invalid_argument("disparity_to_depth: focal and baseline must be positive");
  double d = disparity_px;
  if (d < kMinDisparityPx) {
    d = kMinDisparityPx;
    if (clamped != nullptr) *clamped = true;
  } else if (clamped != nullptr) {
    *clamped = false;
  }
  return focal_px * baseline_m / d;
}

FlowFromPose pose_depth_to_flow(const Pose& pose, const Image& depth_m,
                                const CameraIntrinsics& intr, int bins) {
  if (bins < 2) throw std::invalid_argument("pose_depth_to_flow: need bins >= 2");
  intr.validate();
  const int height = static_cast<int>(depth_m.rows());
  const int width = static_cast<int>(depth_m.cols());

  FlowFromPose out;
  out.flow = FlowField(height, width);
  out.valid = MaskImage::Constant(height, width, 1);

  const Mat3 rot = euler_to_rotation(pose.psi, pose.beta, pose.phi);
  const Vec3& t = pose.translation;
  const double inv_span = 1.0 / (bins - 1);

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Vec3 ray = intr.unproject(x, y);
      const Vec3 p = rot * (depth_m(y, x) * ray) + t;
      if (p.z() <= kMinDepthM) {
        out.valid(y, x) = 0;
        ++out.invalid_pixels;
        continue;
      }
      const double x_star = intr.fx * p.x() / p.z() + intr.cx;
      const double y_star = intr.fy * p.y() / p.z() + intr.cy;
      out.flow.u(y, x) = (x_star - x) * inv_span;
      out.flow.v(y, x) = (y_star - y) * inv_span;
    }
  }
  return out;
}

FlowFromPose pose_disparity_to_flow(const Pose& pose, const DisparityField& disparity,
                                    const CameraIntrinsics& intr, double baseline_m,
                                    int bins) {
  if (baseline_m <= 0.0)
    throw std::invalid_argument("pose_disparity_to_flow: baseline must be positive");
  const int height = static_cast<int>(disparity.rows());
  const int width = static_cast<int>(disparity.cols());
  Image depth(height, width);
  std::int64_t clamped_count = 0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      bool clamped = false;
      depth(y, x) = disparity_to_depth(disparity(y, x), intr.fx, baseline_m, &clamped);
      if (clamped) ++clamped_count;
    }
  }
  FlowFromPose out = pose_depth_to_flow(pose, depth, intr, bins);
  out.clamped_disparities = clamped_count;
  return out;
}

}  // namespace evmc
