#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "evmc/types.hpp"

namespace evmc {

/// B x H x W signed event mass, stored bin-major (B planes of H x W).
struct EventVolume {
  int bins = 0;
  int height = 0;
  int width = 0;
  std::vector<Image> data;
  std::int64_t dropped_events = 0;  // events that deposited no weight at all

  EventVolume() = default;
  EventVolume(int b, int h, int w)
      : bins(b), height(h), width(w), data(static_cast<std::size_t>(b), Image::Zero(h, w)) {}

  double sum() const {
    double s = 0.0;
    for (const auto& plane : data) s += plane.sum();
    return s;
  }
};

/// Triangle kernel max(0, 1 - |a|).
template <typename S>
inline S bilinear_kernel(S a) {
  const S w = S(1) - std::abs(a);
  return w > S(0) ? w : S(0);
}

/// Subgradient of the triangle kernel: 0 at |a| >= 1, and the left limit (+1)
/// at a = 0. Fixing one choice keeps gradient tests reproducible.
template <typename S>
inline S bilinear_kernel_grad(S a) {
  if (a <= S(-1) || a >= S(1)) return S(0);
  return a <= S(0) ? S(1) : S(-1);
}

struct ScaledTimestamps {
  std::vector<double> t_star;  // each in [0, B-1]
  bool zero_duration = false;  // tN == t0; all t* forced to 0
};

/// Maps event timestamps onto the bin axis: t* = (B-1) (t - t0) / (tN - t0).
ScaledTimestamps scale_timestamps(const EventSlice& slice, int bins);

/// Trilinear accumulation of polarity mass. Each event touches up to 8 voxels;
/// weight that falls outside the frame is dropped, not renormalized.
/// `n_threads` <= 0 uses the EVMC_THREADS setting.
EventVolume build_volume(const EventSlice& slice, int bins, int height, int width,
                         int n_threads = -1);

}  // namespace evmc
