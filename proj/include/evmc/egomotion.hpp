#pragma once

#include <cstdint>

#include "evmc/types.hpp"

namespace evmc {

/// 6-DoF egomotion: ZYX-intrinsic Euler angles and a translation in meters.
/// Camera-motion convention: a point P seen at the window start appears at
/// R P + T at the window end.
struct Pose {
  double psi = 0.0;   // rotation about x
  double beta = 0.0;  // rotation about y
  double phi = 0.0;   // rotation about z
  Vec3 translation = Vec3::Zero();
};

inline constexpr double kMinDisparityPx = 0.1;
inline constexpr double kMinDepthM = 0.05;

/// R = Rz(phi) Ry(beta) Rx(psi).
Mat3 euler_to_rotation(double psi, double beta, double phi);

/// Inverse of euler_to_rotation away from gimbal lock (|beta| near pi/2).
/// Returns (psi, beta, phi).
Vec3 rotation_to_euler(const Mat3& rotation);

/// Z = f b / d, with d clamped to kMinDisparityPx (sets *clamped when hit).
double disparity_to_depth(double disparity_px, double focal_px, double baseline_m,
                          bool* clamped = nullptr);

struct FlowFromPose {
  FlowField flow;
  MaskImage valid;  // 0 where the reprojected depth fell below kMinDepthM
  std::int64_t clamped_disparities = 0;
  std::int64_t invalid_pixels = 0;
};

/// Flow in pixels/bin from a rigid motion and per-pixel depth:
/// (x*, y*) = K pi(R Z K^-1 (x, y, 1)^T + T), (u, v) = ((x*, y*) - (x, y)) / (B - 1).
/// Pixels whose reprojected depth is <= kMinDepthM get zero flow and valid = 0.
FlowFromPose pose_depth_to_flow(const Pose& pose, const Image& depth_m,
                                const CameraIntrinsics& intr, int bins);

/// Same, with depth Z = fx b / d per pixel (d clamped below kMinDisparityPx).
FlowFromPose pose_disparity_to_flow(const Pose& pose, const DisparityField& disparity,
                                    const CameraIntrinsics& intr, double baseline_m,
                                    int bins);

}  // namespace evmc
