#include "evmc/voxel.hpp"

#include <stdexcept>
#include <thread>

namespace evmc {

ScaledTimestamps scale_timestamps(const EventSlice& slice, int bins) {
  if (bins < 1) throw std::invalid_argument("scale_timestamps: bins must be >= 1");
  ScaledTimestamps out;
  out.t_star.resize(slice.size());
  const double span = slice.tN - slice.t0;
  if (span <= 0.0) {
    out.zero_duration = true;
    for (auto& t : out.t_star) t = 0.0;
    return out;
  }
  const double scale = (bins - 1) / span;
  for (std::size_t i = 0; i < slice.size(); ++i)
    out.t_star[i] = (slice.events[i].t - slice.t0) * scale;
  return out;
}

namespace {

void accumulate_events(const EventSlice& slice, const std::vector<double>& t_star,
                       std::size_t begin, std::size_t end, EventVolume& vol) {
  const int bins = vol.bins, height = vol.height, width = vol.width;
  for (std::size_t i = begin; i < end; ++i) {
    const Event& e = slice.events[i];
    const double x = e.x, y = e.y, ts = t_star[i];
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const int b0 = static_cast<int>(std::floor(ts));
    bool deposited = false;
    for (int db = 0; db <= 1; ++db) {
      const int b = b0 + db;
      if (b < 0 || b >= bins) continue;
      const double wb = bilinear_kernel(b - ts);
      if (wb == 0.0) continue;
      Image& plane = vol.data[static_cast<std::size_t>(b)];
      for (int dy = 0; dy <= 1; ++dy) {
        const int py = y0 + dy;
        if (py < 0 || py >= height) continue;
        const double wy = bilinear_kernel(py - y);
        if (wy == 0.0) continue;
        for (int dx = 0; dx <= 1; ++dx) {
          const int px = x0 + dx;
          if (px < 0 || px >= width) continue;
          const double wx = bilinear_kernel(px - x);
          if (wx == 0.0) continue;
          plane(py, px) += static_cast<double>(e.p) * wx * wy * wb;
          deposited = true;
        }
      }
    }
    if (!deposited) ++vol.dropped_events;
  }
}

}  // namespace

EventVolume build_volume(const EventSlice& slice, int bins, int height, int width,
                         int n_threads) {
  if (bins < 1) throw std::invalid_argument("build_volume: bins must be >= 1");
  if (height < 1 || width < 1)
    throw std::invalid_argument("build_volume: dimensions must be >= 1");

  const ScaledTimestamps scaled = scale_timestamps(slice, bins);
  EventVolume vol(bins, height, width);

  const int workers = n_threads > 0 ? n_threads : thread_count();
  const std::size_t n = slice.size();
  if (workers <= 1 || n < 1024) {
    accumulate_events(slice, scaled.t_star, 0, n, vol);
    return vol;
  }

  // Partition events across workers into private volumes, reduced in worker
  // order. Accumulation stays in f64 to meet the 1e-9 reduction tolerance.
  std::vector<EventVolume> partials(static_cast<std::size_t>(workers),
                                    EventVolume(bins, height, width));
  std::vector<std::thread> threads;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(n, static_cast<std::size_t>(w) * chunk);
    const std::size_t end = std::min(n, begin + chunk);
    threads.emplace_back([&, w, begin, end] {
      accumulate_events(slice, scaled.t_star, begin, end, partials[static_cast<std::size_t>(w)]);
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& part : partials) {
    for (int b = 0; b < bins; ++b) vol.data[static_cast<std::size_t>(b)] += part.data[static_cast<std::size_t>(b)];
    vol.dropped_events += part.dropped_events;
  }
  return vol;
}

}  // namespace evmc
