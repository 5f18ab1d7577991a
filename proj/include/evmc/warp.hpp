#pragma once

#include <cstdint>
#include <vector>

#include "evmc/types.hpp"

namespace evmc {

/// Events propagated to a common reference time t' (bin units).
/// Normalized timestamps s in [0, 1] are unaffected by the choice of t'.
struct WarpedEvents {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> s;
  std::vector<std::int8_t> p;
  double t_prime = 0.0;

  std::size_t size() const { return x.size(); }
};

/// Per-polarity average-timestamp images and their accumulated kernel weights.
struct TimestampImages {
  Image t_plus, t_minus;
  Image weight_plus, weight_minus;
};

/// Denominator threshold below which an average-timestamp pixel is left at 0.
inline constexpr double kZeroWeightEps = 1e-9;

/// Bilinear lookup of (u, v) at a real-valued position, clamped to the border.
Vec2 sample_flow(const FlowField& flow, double x, double y);

/// (x', y') = (x, y) + (t' - t*) (u, v), with flow sampled at the original
/// event position and t* from the bin-axis scaling. Events leaving the frame
/// are kept; they simply gather no raster weight downstream.
WarpedEvents propagate_events(const EventSlice& slice, const FlowField& flow,
                              double t_prime, int bins);

TimestampImages timestamp_images(const WarpedEvents& warped, int height, int width,
                                 int n_threads = -1);

/// Polarity-agnostic bilinear mass (event count after deblurring).
Image count_image(const WarpedEvents& warped, int height, int width, int n_threads = -1);

}  // namespace evmc
