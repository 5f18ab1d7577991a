#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "evmc/types.hpp"

namespace evmc {

/// Endpoint error above this is an outlier (KITTI-style convention).
inline constexpr double kOutlierThresholdPx = 3.0;

/// (u_hat, v_hat) = (u, v) * (B - 1) * dt / (tN - t0): pixels/bin to pixel
/// displacement over a test window dt.
FlowField flow_to_displacement(const FlowField& flow, int bins, double dt_s,
                               double window_s);

struct FlowError {
  double aee = 0.0;
  double outlier_fraction = 0.0;
  std::int64_t pixels = 0;
};

/// Mean endpoint error and > 3 px outlier fraction over masked pixels.
FlowError aee(const FlowField& pred, const FlowField& gt, const MaskImage& mask);

/// Mean |pred - gt| over pixels with gt <= threshold and event_mask set, per
/// threshold; empty selections report no value rather than 0.
std::vector<std::optional<double>> depth_error(const Image& pred_depth_m,
                                               const Image& gt_depth_m,
                                               const MaskImage& event_mask,
                                               const std::vector<double>& thresholds_m);

inline const std::vector<double> kDefaultDepthThresholdsM = {10.0, 20.0, 30.0};

/// Angle between translation directions, scale-invariant. Radians.
double rpe(const Vec3& t_pred, const Vec3& t_gt);

/// Matrix log of a rotation via axis-angle extraction, with series fallbacks
/// near 0 and pi. Returns the skew-symmetric log.
Mat3 rotation_log(const Mat3& rotation);

/// ||logm(R_pred^T R_gt)||_F; equals sqrt(2) * geodesic angle. Radians.
double rre(const Mat3& r_pred, const Mat3& r_gt);

}  // namespace evmc
