#pragma once

#include <string>
#include <vector>

#include "evmc/types.hpp"
#include "evmc/voxel.hpp"

namespace evmc {

enum class EventFormat { Csv, Binary };

struct LoadedEvents {
  EventSlice slice;
  std::vector<std::string> warnings;
};

/// Reads an event file. CSV lines are whitespace-separated `t x y p` with `#`
/// comments; binary records are packed little-endian f64 t, f32 x, f32 y, i8 p.
/// Polarity 0 on disk maps to -1. Unsorted input is sorted and flagged in
/// `warnings`; malformed content throws with the offending line/offset.
LoadedEvents load_events(const std::string& path, EventFormat format);

void save_events(const std::string& path, const EventSlice& slice, EventFormat format);

struct LoadedCalibration {
  StereoRig rig;
  std::vector<std::string> warnings;
};

/// Parses `key = value` calibration. Unprefixed keys (fx, fy, cx, cy, width,
/// height) apply to both cameras; `left.`/`right.` prefixes override one side.
/// `baseline` is required. Duplicate keys: last wins, with a warning.
LoadedCalibration load_calibration(const std::string& path);

/// 8-bit binary PGM, values scaled linearly from [min, max] to [0, 255].
void write_pgm(const std::string& path, const Image& img);

/// 24-bit binary PPM from RGB channels in [0, 1].
void write_ppm(const std::string& path, const Image& r, const Image& g, const Image& b);

/// Flow rendered with hue = direction, saturation = magnitude / max magnitude.
void write_flow_ppm(const std::string& path, const FlowField& flow);

// Flat binary images: int32 rows, int32 cols, then row-major f64 samples.
void write_image_binary(const std::string& path, const Image& img);
Image read_image_binary(const std::string& path);

// Flow: int32 H, int32 W, then the u plane and the v plane, row-major f64.
void write_flow_binary(const std::string& path, const FlowField& flow);
FlowField read_flow_binary(const std::string& path);

// Volume: int32 B, H, W header then bin-major row-major f64 planes.
void write_volume_binary(const std::string& path, const EventVolume& vol);
EventVolume read_volume_binary(const std::string& path);

}  // namespace evmc
