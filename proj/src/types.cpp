#include "evmc/types.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>

namespace evmc {

EventSlice EventSlice::from_events(std::vector<Event> evs) {
  EventSlice slice;
  slice.events = std::move(evs);
  if (!std::is_sorted(slice.events.begin(), slice.events.end(),
                      [](const Event& a, const Event& b) { return a.t < b.t; })) {
    std::stable_sort(slice.events.begin(), slice.events.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });
  }
  if (!slice.events.empty()) {
    slice.t0 = slice.events.front().t;
    slice.tN = slice.events.back().t;
  }
  return slice;
}

void CameraIntrinsics::validate() const {
  if (fx <= 0.0 || fy <= 0.0)
    throw std::invalid_argument("CameraIntrinsics: focal lengths must be positive");
  if (width < 1 || height < 1)
    throw std::invalid_argument("CameraIntrinsics: resolution must be at least 1x1");
}

CameraIntrinsics default_intrinsics(int height, int width) {
  CameraIntrinsics intr;
  intr.fx = intr.fy = 100.0;
  intr.cx = (width - 1) / 2.0;
  intr.cy = (height - 1) / 2.0;
  intr.width = width;
  intr.height = height;
  return intr;
}

void StereoRig::validate() const {
  left.validate();
  right.validate();
  if (baseline_m <= 0.0) throw std::invalid_argument("StereoRig: baseline must be positive");
}

int thread_count() {
  const char* env = std::getenv("EVMC_THREADS");
  if (env == nullptr) return 1;
  const long requested = std::strtol(env, nullptr, 10);
  if (requested <= 0) return 1;
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  return static_cast<int>(std::min<long>(requested, hw));
}

}  // namespace evmc
