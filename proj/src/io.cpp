#include "evmc/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace evmc {

namespace {

constexpr std::size_t kBinaryRecordBytes = 8 + 4 + 4 + 1;  // f64 t, f32 x, f32 y, i8 p

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error(path + ": " + what);
}

std::int8_t map_polarity(long p, const std::string& path, const char* unit, std::size_t index) {
  if (p == 1) return 1;
  if (p == -1) return -1;
  if (p == 0) return -1;  // {0,1} encoding maps 0 to -1
  fail(path, std::string(unit) + " " + std::to_string(index) + ": polarity " +
                 std::to_string(p) + " outside {-1, 0, 1}");
}

LoadedEvents finish_load(std::vector<Event> events, const std::string& path,
                         std::vector<std::string> warnings) {
  const bool sorted = std::is_sorted(events.begin(), events.end(),
                                     [](const Event& a, const Event& b) { return a.t < b.t; });
  if (!sorted)
    warnings.push_back(path + ": timestamps were not sorted; stable-sorted on load");
  LoadedEvents out;
  out.slice = EventSlice::from_events(std::move(events));
  out.warnings = std::move(warnings);
  return out;
}

LoadedEvents load_events_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open");
  std::vector<Event> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    double t, x, y;
    long p;
    if (!(ss >> t)) {
      std::string residue;
      if (ss.clear(), ss >> residue)
        fail(path, "line " + std::to_string(line_no) + ": expected `t x y p`");
      continue;  // blank or comment-only line
    }
    if (!(ss >> x >> y >> p))
      fail(path, "line " + std::to_string(line_no) + ": expected `t x y p`");
    std::string trailing;
    if (ss >> trailing)
      fail(path, "line " + std::to_string(line_no) + ": trailing content '" + trailing + "'");
    Event e;
    e.t = t;
    e.x = static_cast<float>(x);
    e.y = static_cast<float>(y);
    e.p = map_polarity(p, path, "line", line_no);
    events.push_back(e);
  }
  return finish_load(std::move(events), path, {});
}

LoadedEvents load_events_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  in.seekg(0, std::ios::end);
  const std::streamoff size = in.tellg();
  in.seekg(0, std::ios::beg);
  if (size % static_cast<std::streamoff>(kBinaryRecordBytes) != 0)
    fail(path, "truncated record at byte offset " +
                   std::to_string(size - size % static_cast<std::streamoff>(kBinaryRecordBytes)));
  const std::size_t n = static_cast<std::size_t>(size) / kBinaryRecordBytes;
  std::vector<Event> events;
  events.reserve(n);
  char buf[kBinaryRecordBytes];
  for (std::size_t i = 0; i < n; ++i) {
    if (!in.read(buf, sizeof(buf)))
      fail(path, "read failed at record " + std::to_string(i));
    Event e;
    std::memcpy(&e.t, buf, 8);
    std::memcpy(&e.x, buf + 8, 4);
    std::memcpy(&e.y, buf + 12, 4);
    const std::int8_t p = static_cast<std::int8_t>(buf[16]);
    e.p = map_polarity(p, path, "record", i);
    events.push_back(e);
  }
  return finish_load(std::move(events), path, {});
}

}  // namespace

LoadedEvents load_events(const std::string& path, EventFormat format) {
  return format == EventFormat::Csv ? load_events_csv(path) : load_events_binary(path);
}

void save_events(const std::string& path, const EventSlice& slice, EventFormat format) {
  if (format == EventFormat::Csv) {
    std::ofstream out(path);
    if (!out) fail(path, "cannot open for writing");
    char buf[128];
    for (const Event& e : slice.events) {
      std::snprintf(buf, sizeof(buf), "%.17g %.9g %.9g %d\n", e.t, static_cast<double>(e.x),
                    static_cast<double>(e.y), static_cast<int>(e.p));
      out << buf;
    }
    if (!out) fail(path, "write failed");
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open for writing");
  char buf[kBinaryRecordBytes];
  for (const Event& e : slice.events) {
    std::memcpy(buf, &e.t, 8);
    std::memcpy(buf + 8, &e.x, 4);
    std::memcpy(buf + 12, &e.y, 4);
    buf[16] = static_cast<char>(e.p);
    out.write(buf, sizeof(buf));
  }
  if (!out) fail(path, "write failed");
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

LoadedCalibration load_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open");
  std::map<std::string, double> kv;
  std::vector<std::string> warnings;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(path, "line " + std::to_string(line_no) + ": expected `key = value`");
    const std::string key = trim(line.substr(0, eq));
    const std::string value_str = trim(line.substr(eq + 1));
    double value;
    try {
      std::size_t pos = 0;
      value = std::stod(value_str, &pos);
      if (pos != value_str.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      fail(path, "line " + std::to_string(line_no) + ": bad value for key '" + key + "'");
    }
    auto [it, inserted] = kv.insert({key, value});
    if (!inserted) {
      if (it->second != value)
        warnings.push_back(path + ": duplicate key '" + key + "', last value wins");
      it->second = value;
    }
  }

  auto lookup = [&](const std::string& side, const std::string& name) -> double {
    if (auto it = kv.find(side + "." + name); it != kv.end()) return it->second;
    if (auto it = kv.find(name); it != kv.end()) return it->second;
    fail(path, "missing calibration key '" + name + "' (or '" + side + "." + name + "')");
  };

  LoadedCalibration out;
  for (const std::string side : {"left", "right"}) {
    CameraIntrinsics intr;
    intr.fx = lookup(side, "fx");
    intr.fy = lookup(side, "fy");
    intr.cx = lookup(side, "cx");
    intr.cy = lookup(side, "cy");
    intr.width = static_cast<int>(lookup(side, "width"));
    intr.height = static_cast<int>(lookup(side, "height"));
    (side == std::string("left") ? out.rig.left : out.rig.right) = intr;
  }
  if (auto it = kv.find("baseline"); it != kv.end())
    out.rig.baseline_m = it->second;
  else
    fail(path, "missing calibration key 'baseline'");
  try {
    out.rig.validate();
  } catch (const std::invalid_argument& err) {
    fail(path, err.what());
  }
  out.warnings = std::move(warnings);
  return out;
}

void write_pgm(const std::string& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open for writing");
  const int h = static_cast<int>(img.rows()), w = static_cast<int>(img.cols());
  out << "P5\n" << w << " " << h << "\n255\n";
  const double lo = img.minCoeff(), hi = img.maxCoeff();
  const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
  std::vector<unsigned char> row(static_cast<std::size_t>(w));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x)
      row[static_cast<std::size_t>(x)] =
          static_cast<unsigned char>(std::lround((img(y, x) - lo) * scale));
    out.write(reinterpret_cast<const char*>(row.data()), w);
  }
  if (!out) fail(path, "write failed");
}

void write_ppm(const std::string& path, const Image& r, const Image& g, const Image& b) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open for writing");
  const int h = static_cast<int>(r.rows()), w = static_cast<int>(r.cols());
  out << "P6\n" << w << " " << h << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(3 * w));
  auto quantize = [](double v) {
    return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      row[static_cast<std::size_t>(3 * x + 0)] = quantize(r(y, x));
      row[static_cast<std::size_t>(3 * x + 1)] = quantize(g(y, x));
      row[static_cast<std::size_t>(3 * x + 2)] = quantize(b(y, x));
    }
    out.write(reinterpret_cast<const char*>(row.data()), 3 * w);
  }
  if (!out) fail(path, "write failed");
}

void write_flow_ppm(const std::string& path, const FlowField& flow) {
  const int h = flow.height(), w = flow.width();
  const Image magnitude = (flow.u.square() + flow.v.square()).sqrt();
  const double max_mag = magnitude.maxCoeff();
  Image r(h, w), g(h, w), b(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double angle = std::atan2(flow.v(y, x), flow.u(y, x));  // [-pi, pi]
      const double hue = (angle + M_PI) / (2.0 * M_PI) * 6.0;       // [0, 6)
      const double sat = max_mag > 0.0 ? magnitude(y, x) / max_mag : 0.0;
      const int sector = std::min(5, static_cast<int>(hue));
      const double f = hue - sector;
      const double p = 1.0 - sat;
      const double q = 1.0 - sat * f;
      const double t = 1.0 - sat * (1.0 - f);
      double rr, gg, bb;
      switch (sector) {
        case 0: rr = 1, gg = t, bb = p; break;
        case 1: rr = q, gg = 1, bb = p; break;
        case 2: rr = p, gg = 1, bb = t; break;
        case 3: rr = p, gg = q, bb = 1; break;
        case 4: rr = t, gg = p, bb = 1; break;
        default: rr = 1, gg = p, bb = q; break;
      }
      r(y, x) = rr;
      g(y, x) = gg;
      b(y, x) = bb;
    }
  }
  write_ppm(path, r, g, b);
}

namespace {

void write_i32(std::ofstream& out, std::int32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}

std::int32_t read_i32(std::ifstream& in, const std::string& path) {
  std::int32_t v;
  if (!in.read(reinterpret_cast<char*>(&v), 4)) fail(path, "truncated header");
  return v;
}

void write_plane(std::ofstream& out, const Image& img) {
  // Row-major storage, written row by row.
  for (Eigen::Index y = 0; y < img.rows(); ++y)
    out.write(reinterpret_cast<const char*>(img.row(y).data()),
              static_cast<std::streamsize>(img.cols() * sizeof(double)));
}

Image read_plane(std::ifstream& in, int h, int w, const std::string& path) {
  Image img(h, w);
  for (int y = 0; y < h; ++y)
    if (!in.read(reinterpret_cast<char*>(img.row(y).data()),
                 static_cast<std::streamsize>(w * sizeof(double))))
      fail(path, "truncated plane data");
  return img;
}

}  // namespace

void write_image_binary(const std::string& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open for writing");
  write_i32(out, static_cast<std::int32_t>(img.rows()));
  write_i32(out, static_cast<std::int32_t>(img.cols()));
  write_plane(out, img);
  if (!out) fail(path, "write failed");
}

Image read_image_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  const std::int32_t h = read_i32(in, path), w = read_i32(in, path);
  if (h < 1 || w < 1) fail(path, "bad image dimensions in header");
  return read_plane(in, h, w, path);
}

void write_flow_binary(const std::string& path, const FlowField& flow) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open for writing");
  write_i32(out, flow.height());
  write_i32(out, flow.width());
  write_plane(out, flow.u);
  write_plane(out, flow.v);
  if (!out) fail(path, "write failed");
}

FlowField read_flow_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  const std::int32_t h = read_i32(in, path), w = read_i32(in, path);
  if (h < 1 || w < 1) fail(path, "bad flow dimensions in header");
  FlowField flow(h, w);
  flow.u = read_plane(in, h, w, path);
  flow.v = read_plane(in, h, w, path);
  return flow;
}

void write_volume_binary(const std::string& path, const EventVolume& vol) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open for writing");
  write_i32(out, vol.bins);
  write_i32(out, vol.height);
  write_i32(out, vol.width);
  for (const Image& plane : vol.data) write_plane(out, plane);
  if (!out) fail(path, "write failed");
}

EventVolume read_volume_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  const std::int32_t b = read_i32(in, path), h = read_i32(in, path), w = read_i32(in, path);
  if (b < 1 || h < 1 || w < 1) fail(path, "bad volume dimensions in header");
  EventVolume vol(b, h, w);
  for (int i = 0; i < b; ++i) vol.data[static_cast<std::size_t>(i)] = read_plane(in, h, w, path);
  return vol;
}

}  // namespace evmc
