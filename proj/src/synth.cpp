#include "evmc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace evmc {

namespace {

// Deterministic uniform doubles straight from the engine output, so slices
// are byte-identical across standard library implementations.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

std::int8_t random_polarity(std::mt19937_64& rng) { return (rng() & 1u) ? 1 : -1; }

void append_noise(std::vector<Event>& events, double noise_rate, double duration_s,
                  int height, int width, std::mt19937_64& rng) {
  const auto n = static_cast<std::int64_t>(std::llround(noise_rate * duration_s));
  for (std::int64_t i = 0; i < n; ++i) {
    Event e;
    e.x = static_cast<float>(uniform(rng, 0.0, width - 1));
    e.y = static_cast<float>(uniform(rng, 0.0, height - 1));
    e.t = uniform(rng, 0.0, duration_s);
    e.p = random_polarity(rng);
    events.push_back(e);
  }
}

// t* draws in [0, B-1] with the first and last pinned to the extremes, so the
// loader's window normalization reproduces the generating t* exactly.
std::vector<double> draw_t_star(std::mt19937_64& rng, std::size_t count, int bins) {
  std::vector<double> t_star(count);
  for (auto& t : t_star) t = uniform(rng, 0.0, static_cast<double>(bins - 1));
  if (count >= 1) t_star.front() = 0.0;
  if (count >= 2) t_star.back() = static_cast<double>(bins - 1);
  return t_star;
}

}  // namespace

ConstantFlowScene gen_constant_flow(int n_sources, int events_per_source, const Vec2& flow,
                                    int bins, int height, int width, std::uint64_t seed,
                                    double noise_rate, double duration_s) {
  if (n_sources < 1 || events_per_source < 1)
    throw std::invalid_argument("gen_constant_flow: need at least one source and event");
  if (bins < 2) throw std::invalid_argument("gen_constant_flow: need bins >= 2");
  if (duration_s <= 0.0) throw std::invalid_argument("gen_constant_flow: duration must be positive");

  const double span = static_cast<double>(bins - 1);
  const double dx = span * flow.x();
  const double dy = span * flow.y();
  const double x_lo = std::max(0.0, -dx), x_hi = (width - 1) - std::max(0.0, dx);
  const double y_lo = std::max(0.0, -dy), y_hi = (height - 1) - std::max(0.0, dy);
  if (x_lo > x_hi || y_lo > y_hi)
    throw std::invalid_argument(
        "gen_constant_flow: flow displacement leaves no in-frame source region");

  std::mt19937_64 rng(seed);
  std::vector<Event> events;
  events.reserve(static_cast<std::size_t>(n_sources) * events_per_source);
  std::vector<double> t_star =
      draw_t_star(rng, static_cast<std::size_t>(n_sources) * events_per_source, bins);

  std::ostringstream offenders;
  std::vector<Vec2> sources;
  sources.reserve(static_cast<std::size_t>(n_sources));
  std::size_t k = 0;
  for (int s = 0; s < n_sources; ++s) {
    const double x0 = uniform(rng, x_lo, x_hi);
    const double y0 = uniform(rng, y_lo, y_hi);
    sources.emplace_back(x0, y0);
    const std::int8_t polarity = random_polarity(rng);
    for (int j = 0; j < events_per_source; ++j, ++k) {
      const double ts = t_star[k];
      const double x = x0 + ts * flow.x();
      const double y = y0 + ts * flow.y();
      if (x < 0.0 || x > width - 1 || y < 0.0 || y > height - 1) {
        offenders << " source " << s << " at (" << x0 << ", " << y0 << ")";
        break;
      }
      Event e;
      e.x = static_cast<float>(x);
      e.y = static_cast<float>(y);
      e.t = ts * duration_s / span;
      e.p = polarity;
      events.push_back(e);
    }
  }
  if (!offenders.str().empty())
    throw std::invalid_argument("gen_constant_flow: sources exit the frame:" + offenders.str());

  append_noise(events, noise_rate, duration_s, height, width, rng);

  ConstantFlowScene scene;
  scene.slice = EventSlice::from_events(std::move(events));
  scene.flow = flow;
  scene.flow_gt = FlowField::constant(height, width, flow.x(), flow.y());
  scene.sources = std::move(sources);
  return scene;
}

RigidScene gen_rigid(const Pose& pose, double depth_m, const CameraIntrinsics& intr, int bins,
                     int height, int width, int n_sources, int events_per_source,
                     std::uint64_t seed, double duration_s, double noise_rate) {
  if (depth_m <= kMinDepthM)
    throw std::invalid_argument("gen_rigid: depth must exceed the near-plane guard");
  if (bins < 2) throw std::invalid_argument("gen_rigid: need bins >= 2");
  intr.validate();

  std::mt19937_64 rng(seed);
  std::vector<Event> events;
  events.reserve(static_cast<std::size_t>(n_sources) * events_per_source);
  std::vector<double> t_star =
      draw_t_star(rng, static_cast<std::size_t>(n_sources) * events_per_source, bins);

  // Project a plane point along the interpolated pose; exact, not linearized.
  auto project_at = [&](const Vec3& point, double tau, double* out_x, double* out_y) -> bool {
    const Mat3 rot = euler_to_rotation(tau * pose.psi, tau * pose.beta, tau * pose.phi);
    const Vec3 p = rot * point + tau * pose.translation;
    if (p.z() <= kMinDepthM) return false;
    *out_x = intr.fx * p.x() / p.z() + intr.cx;
    *out_y = intr.fy * p.y() / p.z() + intr.cy;
    return *out_x >= 0.0 && *out_x <= width - 1 && *out_y >= 0.0 && *out_y <= height - 1;
  };

  const double margin = 0.15;  // keep sources away from the frame edge
  const double x_lo = margin * (width - 1), x_hi = (1.0 - margin) * (width - 1);
  const double y_lo = margin * (height - 1), y_hi = (1.0 - margin) * (height - 1);

  std::ostringstream offenders;
  std::vector<Vec2> sources;
  sources.reserve(static_cast<std::size_t>(n_sources));
  std::size_t k = 0;
  for (int s = 0; s < n_sources; ++s) {
    const double x0 = uniform(rng, x_lo, x_hi);
    const double y0 = uniform(rng, y_lo, y_hi);
    sources.emplace_back(x0, y0);
    const std::int8_t polarity = random_polarity(rng);
    const Vec3 point = depth_m * intr.unproject(x0, y0);
    double x_end, y_end;
    if (!project_at(point, 1.0, &x_end, &y_end)) {
      offenders << " source " << s << " at (" << x0 << ", " << y0 << ")";
      k += static_cast<std::size_t>(events_per_source);
      continue;
    }
    for (int j = 0; j < events_per_source; ++j, ++k) {
      const double ts = t_star[k];
      double x, y;
      if (!project_at(point, ts / (bins - 1), &x, &y)) {
        offenders << " source " << s << " at t*=" << ts;
        break;
      }
      Event e;
      e.x = static_cast<float>(x);
      e.y = static_cast<float>(y);
      e.t = ts * duration_s / (bins - 1);
      e.p = polarity;
      events.push_back(e);
    }
  }
  if (!offenders.str().empty())
    throw std::invalid_argument("gen_rigid: trajectories leave the frame:" + offenders.str());

  append_noise(events, noise_rate, duration_s, height, width, rng);

  RigidScene scene;
  scene.slice = EventSlice::from_events(std::move(events));
  scene.pose_gt = pose;
  scene.depth_m = depth_m;
  scene.intrinsics = intr;
  scene.sources = std::move(sources);
  return scene;
}

ConstantFlowScene gen_constant_flow(const SynthScene& scene) {
  return gen_constant_flow(scene.n_sources, scene.events_per_source, scene.flow, scene.bins,
                           scene.height, scene.width, scene.seed, scene.noise_rate,
                           scene.duration_s);
}

RigidScene gen_rigid(const SynthScene& scene) {
  const CameraIntrinsics intr = scene.intrinsics.fx > 0.0
                                    ? scene.intrinsics
                                    : default_intrinsics(scene.height, scene.width);
  return gen_rigid(scene.pose, scene.depth_m, intr, scene.bins, scene.height, scene.width,
                   scene.n_sources, scene.events_per_source, scene.seed, scene.duration_s,
                   scene.noise_rate);
}

StereoScene gen_stereo_pair(const SynthScene& scene, const StereoRig& rig,
                            double uniform_disparity_px, std::uint64_t seed) {
  if (uniform_disparity_px < 0.0)
    throw std::invalid_argument("gen_stereo_pair: disparity must be >= 0");
  rig.validate();

  // Generate the shared geometry without noise; noise is per-camera below.
  SynthScene base = scene;
  base.noise_rate = 0.0;
  EventSlice left_clean;
  if (scene.motion == SynthScene::Motion::ConstantFlow) {
    // Confine sources to x >= disparity so every event is visible on the
    // right: generate into a narrowed frame, then shift right by the margin.
    const int shift = static_cast<int>(std::ceil(uniform_disparity_px));
    if (scene.width - shift < 2)
      throw std::invalid_argument("gen_stereo_pair: disparity too large for the frame");
    base.width = scene.width - shift;
    left_clean = gen_constant_flow(base).slice;
    for (Event& e : left_clean.events) e.x = static_cast<float>(e.x + shift);
  } else {
    left_clean = gen_rigid(base).slice;
  }

  std::ostringstream offenders;
  std::vector<Event> right_events = left_clean.events;
  for (std::size_t i = 0; i < right_events.size(); ++i) {
    right_events[i].x = static_cast<float>(right_events[i].x - uniform_disparity_px);
    if (right_events[i].x < 0.0f)
      offenders << " event " << i << " at x=" << right_events[i].x + uniform_disparity_px;
  }
  if (!offenders.str().empty())
    throw std::invalid_argument("gen_stereo_pair: sources not visible in the right frame:" +
                                offenders.str());

  std::vector<Event> left_events = left_clean.events;
  std::mt19937_64 rng_left(seed * 2 + 1), rng_right(seed * 2 + 2);
  append_noise(left_events, scene.noise_rate, scene.duration_s, scene.height, scene.width,
               rng_left);
  append_noise(right_events, scene.noise_rate, scene.duration_s, scene.height, scene.width,
               rng_right);

  StereoScene out;
  out.left = EventSlice::from_events(std::move(left_events));
  out.right = EventSlice::from_events(std::move(right_events));
  out.disparity_gt = Image::Constant(scene.height, scene.width, uniform_disparity_px);
  out.disparity_px = uniform_disparity_px;
  return out;
}

}  // namespace evmc
