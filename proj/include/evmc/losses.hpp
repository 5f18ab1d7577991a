#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "evmc/egomotion.hpp"
#include "evmc/types.hpp"
#include "evmc/warp.hpp"

namespace evmc {

inline constexpr double kDefaultCharbonnierEps = 1e-3;
inline constexpr int kDefaultCensusWindow = 5;

/// Loss-term weights; defaults follow the usual {1.0, 1.0, 0.1, 0.2} setting.
struct LossWeights {
  double lambda1 = 1.0;  // flow smoothness
  double lambda2 = 1.0;  // stereo census
  double lambda3 = 0.1;  // left-right consistency
  double lambda4 = 0.2;  // disparity smoothness
};

/// Scalar objective with a per-term breakdown; total is always the weighted
/// sum of the listed terms.
struct LossReport {
  double total = 0.0;
  std::map<std::string, double> terms;
  LossWeights weights;
};

std::string to_json(const LossReport& report);

inline double charbonnier(double x, double eps) { return std::sqrt(x * x + eps * eps); }
inline double charbonnier_grad(double x, double eps) { return x / charbonnier(x, eps); }

/// Sum over pixels of T+^2 + T-^2 for one propagated event set.
double time_loss_at(const WarpedEvents& warped, int height, int width);

/// Two-sided deblurring loss: time_loss_at with t' = 0 plus t' = B - 1.
double time_loss(const EventSlice& slice, const FlowField& flow, int bins);

/// Negated variance of the deblurred count image (lower is better). Kept for
/// comparison experiments; prone to collapsing events onto lines.
double variance_loss(const WarpedEvents& warped, int height, int width);

/// Charbonnier of 4-neighbor differences, each unordered pair counted once.
double smoothness_loss(const Image& channel, double eps);
double smoothness_loss(const FlowField& flow, double eps);

/// Per pixel, sign(center - neighbor) over a window x window neighborhood,
/// flattened row-major; the self entry and out-of-frame neighbors are 0.
struct CensusImage {
  int window = kDefaultCensusWindow;
  std::vector<Image> planes;  // window^2 planes of {-1, 0, +1}

  int height() const { return planes.empty() ? 0 : static_cast<int>(planes[0].rows()); }
  int width() const { return planes.empty() ? 0 : static_cast<int>(planes[0].cols()); }
};

CensusImage census_transform(const Image& img, int window);

/// Symmetric census photometric loss: the right census sampled at x - dL is
/// compared against the left (and mirrored with x + dR). Pixels whose sample
/// position leaves the frame are excluded.
double census_stereo_loss(const Image& left_count, const Image& right_count,
                          const DisparityField& disp_left, const DisparityField& disp_right,
                          int window, double eps);

/// sum rho(dL(x, y) - dR(x - dL(x, y), y)) plus the mirrored term, with
/// bilinear sampling; out-of-frame samples are excluded.
double lr_consistency_loss(const DisparityField& disp_left, const DisparityField& disp_right,
                           double eps);

/// L = L_time + lambda1 L_smooth.
LossReport total_flow_loss(const EventSlice& slice, const FlowField& flow, int bins,
                           double lambda1, double eps);

/// L = L_temporal + lambda2 L_stereo + lambda3 L_consistency + lambda4 L_smooth,
/// with the temporal term summed over both cameras through pose-derived flow
/// and smoothness applied to the disparities. Count images for the census term
/// are deblurred to t' = 0.
LossReport total_sfm_loss(const EventSlice& left, const EventSlice& right, const Pose& pose,
                          const DisparityField& disp_left, const DisparityField& disp_right,
                          const StereoRig& rig, int bins, const LossWeights& weights,
                          double eps, int census_window);

}  // namespace evmc
