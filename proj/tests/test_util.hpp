#pragma once

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include "evmc/types.hpp"

namespace evmc::testing {

// Unique scratch directory under the system temp root, removed on destruction.
struct TempDir {
  std::filesystem::path path;

  TempDir() {
    const auto base = std::filesystem::temp_directory_path();
    for (int attempt = 0; attempt < 100; ++attempt) {
      auto candidate = base / ("evmc_test_" + std::to_string(std::rand()) + "_" +
                               std::to_string(attempt));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path = candidate;
        return;
      }
    }
    throw std::runtime_error("TempDir: could not create scratch directory");
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

inline Image random_image(std::mt19937_64& rng, int h, int w, double lo, double hi) {
  Image img(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img(y, x) = uniform(rng, lo, hi);
  return img;
}

inline FlowField random_flow(std::mt19937_64& rng, int h, int w, double amplitude) {
  FlowField f(h, w);
  f.u = random_image(rng, h, w, -amplitude, amplitude);
  f.v = random_image(rng, h, w, -amplitude, amplitude);
  return f;
}

}  // namespace evmc::testing
