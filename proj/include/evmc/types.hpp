#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace evmc {

/// Dense row-major image/field storage, indexed (row = y, col = x).
template <typename Scalar>
using ImageT = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Image = ImageT<double>;
using MaskImage = ImageT<std::uint8_t>;

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// One camera event. Positions are real-valued (inputs are assumed rectified,
/// which yields non-integer pixel coordinates); polarity is +1 or -1.
struct Event {
  float x = 0.0f;
  float y = 0.0f;
  double t = 0.0;  // seconds
  std::int8_t p = 1;
};

/// Events ordered by timestamp plus the time window they span.
/// An empty slice uses the t0 = tN = 0 convention.
struct EventSlice {
  std::vector<Event> events;
  double t0 = 0.0;
  double tN = 0.0;

  std::size_t size() const { return events.size(); }
  bool empty() const { return events.empty(); }
  double duration() const { return tN - t0; }

  /// Stable-sorts by timestamp (ties keep input order) and derives the window.
  static EventSlice from_events(std::vector<Event> evs);
};

struct CameraIntrinsics {
  double fx = 0.0, fy = 0.0;
  double cx = 0.0, cy = 0.0;
  int width = 0, height = 0;

  void validate() const;
  Vec3 unproject(double x, double y) const {
    return {(x - cx) / fx, (y - cy) / fy, 1.0};
  }
};

/// Default pinhole used when no calibration file is supplied.
CameraIntrinsics default_intrinsics(int height, int width);

struct StereoRig {
  CameraIntrinsics left;
  CameraIntrinsics right;
  double baseline_m = 0.0;

  void validate() const;
};

/// Dense per-pixel optical flow in pixels/bin.
struct FlowField {
  Image u;
  Image v;

  FlowField() = default;
  FlowField(int height, int width)
      : u(Image::Zero(height, width)), v(Image::Zero(height, width)) {}

  static FlowField constant(int height, int width, double u0, double v0) {
    FlowField f(height, width);
    f.u.setConstant(u0);
    f.v.setConstant(v0);
    return f;
  }

  int height() const { return static_cast<int>(u.rows()); }
  int width() const { return static_cast<int>(u.cols()); }
  bool all_finite() const { return u.allFinite() && v.allFinite(); }
};

/// Per-pixel stereo disparity in pixels, >= 0.
using DisparityField = Image;

/// Worker count from EVMC_THREADS; unset or 0 means single-threaded
/// (the deterministic mode).
int thread_count();

}  // namespace evmc
