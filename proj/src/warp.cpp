#include "evmc/warp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "evmc/voxel.hpp"

namespace evmc {

Vec2 sample_flow(const FlowField& flow, double x, double y) {
  const int h = flow.height(), w = flow.width();
  const double xc = std::clamp(x, 0.0, static_cast<double>(w - 1));
  const double yc = std::clamp(y, 0.0, static_cast<double>(h - 1));
  int x0 = static_cast<int>(std::floor(xc));
  int y0 = static_cast<int>(std::floor(yc));
  if (x0 > w - 2) x0 = std::max(0, w - 2);
  if (y0 > h - 2) y0 = std::max(0, h - 2);
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double fx = xc - x0, fy = yc - y0;
  const double w00 = (1 - fx) * (1 - fy), w01 = fx * (1 - fy);
  const double w10 = (1 - fx) * fy, w11 = fx * fy;
  return {w00 * flow.u(y0, x0) + w01 * flow.u(y0, x1) + w10 * flow.u(y1, x0) + w11 * flow.u(y1, x1),
          w00 * flow.v(y0, x0) + w01 * flow.v(y0, x1) + w10 * flow.v(y1, x0) + w11 * flow.v(y1, x1)};
}

WarpedEvents propagate_events(const EventSlice& slice, const FlowField& flow,
                              double t_prime, int bins) {
  if (bins < 2) throw std::invalid_argument("propagate_events: need bins >= 2");
  if (!flow.all_finite()) throw std::invalid_argument("propagate_events: flow must be finite");

  const ScaledTimestamps scaled = scale_timestamps(slice, bins);
  WarpedEvents out;
  const std::size_t n = slice.size();
  out.x.resize(n);
  out.y.resize(n);
  out.s.resize(n);
  out.p.resize(n);
  out.t_prime = t_prime;
  const double inv_span = 1.0 / (bins - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const Event& e = slice.events[i];
    const Vec2 uv = sample_flow(flow, e.x, e.y);
    const double dt = t_prime - scaled.t_star[i];
    out.x[i] = e.x + dt * uv.x();
    out.y[i] = e.y + dt * uv.y();
    out.s[i] = scaled.t_star[i] * inv_span;
    out.p[i] = e.p;
  }
  return out;
}

namespace {

struct RasterPlanes {
  Image num_plus, num_minus, den_plus, den_minus, count;
};

void rasterize(const WarpedEvents& w, std::size_t begin, std::size_t end, RasterPlanes& r) {
  const int height = static_cast<int>(r.count.rows());
  const int width = static_cast<int>(r.count.cols());
  for (std::size_t i = begin; i < end; ++i) {
    const double x = w.x[i], y = w.y[i], s = w.s[i];
    const bool positive = w.p[i] > 0;
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    for (int dy = 0; dy <= 1; ++dy) {
      const int py = y0 + dy;
      if (py < 0 || py >= height) continue;
      const double wy = bilinear_kernel(py - y);
      if (wy == 0.0) continue;
      for (int dx = 0; dx <= 1; ++dx) {
        const int px = x0 + dx;
        if (px < 0 || px >= width) continue;
        const double wght = bilinear_kernel(px - x) * wy;
        if (wght == 0.0) continue;
        r.count(py, px) += wght;
        if (positive) {
          r.num_plus(py, px) += wght * s;
          r.den_plus(py, px) += wght;
        } else {
          r.num_minus(py, px) += wght * s;
          r.den_minus(py, px) += wght;
        }
      }
    }
  }
}

RasterPlanes rasterize_all(const WarpedEvents& w, int height, int width, int n_threads) {
  RasterPlanes planes{Image::Zero(height, width), Image::Zero(height, width),
                      Image::Zero(height, width), Image::Zero(height, width),
                      Image::Zero(height, width)};
  const int workers = n_threads > 0 ? n_threads : thread_count();
  const std::size_t n = w.size();
  if (workers <= 1 || n < 1024) {
    rasterize(w, 0, n, planes);
    return planes;
  }
  std::vector<RasterPlanes> partials;
  partials.reserve(static_cast<std::size_t>(workers));
  for (int i = 0; i < workers; ++i)
    partials.push_back(RasterPlanes{Image::Zero(height, width), Image::Zero(height, width),
                                    Image::Zero(height, width), Image::Zero(height, width),
                                    Image::Zero(height, width)});
  std::vector<std::thread> threads;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (int t = 0; t < workers; ++t) {
    const std::size_t begin = std::min(n, static_cast<std::size_t>(t) * chunk);
    const std::size_t end = std::min(n, begin + chunk);
    threads.emplace_back([&, t, begin, end] { rasterize(w, begin, end, partials[static_cast<std::size_t>(t)]); });
  }
  for (auto& t : threads) t.join();
  for (const auto& part : partials) {
    planes.num_plus += part.num_plus;
    planes.num_minus += part.num_minus;
    planes.den_plus += part.den_plus;
    planes.den_minus += part.den_minus;
    planes.count += part.count;
  }
  return planes;
}

}  // namespace

TimestampImages timestamp_images(const WarpedEvents& warped, int height, int width,
                                 int n_threads) {
  if (height < 1 || width < 1)
    throw std::invalid_argument("timestamp_images: dimensions must be >= 1");
  RasterPlanes planes = rasterize_all(warped, height, width, n_threads);
  TimestampImages out;
  out.t_plus = (planes.den_plus > kZeroWeightEps)
                   .select(planes.num_plus / planes.den_plus, Image::Zero(height, width));
  out.t_minus = (planes.den_minus > kZeroWeightEps)
                    .select(planes.num_minus / planes.den_minus, Image::Zero(height, width));
  out.weight_plus = std::move(planes.den_plus);
  out.weight_minus = std::move(planes.den_minus);
  return out;
}

Image count_image(const WarpedEvents& warped, int height, int width, int n_threads) {
  if (height < 1 || width < 1)
    throw std::invalid_argument("count_image: dimensions must be >= 1");
  return std::move(rasterize_all(warped, height, width, n_threads).count);
}

}  // namespace evmc
