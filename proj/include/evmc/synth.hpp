#pragma once

#include <cstdint>
#include <vector>

#include "evmc/egomotion.hpp"
#include "evmc/types.hpp"

namespace evmc {

/// Scene description for the generators below; reproducible from the seed.
struct SynthScene {
  enum class Motion { ConstantFlow, Rigid };

  std::uint64_t seed = 0;
  int n_sources = 40;
  int events_per_source = 50;
  double duration_s = 1.0;
  double noise_rate = 0.0;  // spurious events per second
  int bins = 9;
  int height = 256;
  int width = 256;

  Motion motion = Motion::ConstantFlow;
  Vec2 flow = Vec2::Zero();  // pixels/bin, for ConstantFlow
  Pose pose;                 // for Rigid
  double depth_m = 10.0;
  CameraIntrinsics intrinsics;  // for Rigid; zero-initialized means "use default"
};

struct ConstantFlowScene {
  EventSlice slice;
  FlowField flow_gt;          // dense, constant
  Vec2 flow;                  // pixels/bin
  std::vector<Vec2> sources;  // start-of-window source positions
};

/// Sources drift along a constant flow; each emits events at positions
/// (x0 + t* u, y0 + t* v) with t* uniform in [0, B-1] (the extremes are pinned
/// so the loader's time scaling reproduces t* exactly). Sources that would
/// exit the frame raise an error listing the offenders.
ConstantFlowScene gen_constant_flow(int n_sources, int events_per_source, const Vec2& flow,
                                    int bins, int height, int width, std::uint64_t seed,
                                    double noise_rate = 0.0, double duration_s = 1.0);

struct RigidScene {
  EventSlice slice;
  Pose pose_gt;
  double depth_m = 0.0;
  CameraIntrinsics intrinsics;
  std::vector<Vec2> sources;  // start-of-window source pixels
};

/// Events traced along the exact reprojection trajectory of each source point
/// on a fronto-parallel plane, with the pose interpolated linearly in
/// (angles, T) across the window.
RigidScene gen_rigid(const Pose& pose, double depth_m, const CameraIntrinsics& intr,
                     int bins, int height, int width, int n_sources, int events_per_source,
                     std::uint64_t seed, double duration_s = 1.0, double noise_rate = 0.0);

struct StereoScene {
  EventSlice left;
  EventSlice right;
  DisparityField disparity_gt;
  double disparity_px = 0.0;
};

/// Right events are the left events shifted by -disparity in x, each side with
/// independently seeded spurious noise.
StereoScene gen_stereo_pair(const SynthScene& scene, const StereoRig& rig,
                            double uniform_disparity_px, std::uint64_t seed);

/// Runs the generator selected by scene.motion.
ConstantFlowScene gen_constant_flow(const SynthScene& scene);
RigidScene gen_rigid(const SynthScene& scene);

}  // namespace evmc
