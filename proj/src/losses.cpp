#include "evmc/losses.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace evmc {

std::string to_json(const LossReport& report) {
  nlohmann::json j;
  j["total"] = report.total;
  j["terms"] = nlohmann::json::object();
  for (const auto& [name, value] : report.terms) j["terms"][name] = value;
  j["weights"] = {{"lambda1", report.weights.lambda1},
                  {"lambda2", report.weights.lambda2},
                  {"lambda3", report.weights.lambda3},
                  {"lambda4", report.weights.lambda4}};
  return j.dump();
}

double time_loss_at(const WarpedEvents& warped, int height, int width) {
  const TimestampImages imgs = timestamp_images(warped, height, width);
  return (imgs.t_plus * imgs.t_plus + imgs.t_minus * imgs.t_minus).sum();
}

double time_loss(const EventSlice& slice, const FlowField& flow, int bins) {
  const int h = flow.height(), w = flow.width();
  const double backward = time_loss_at(propagate_events(slice, flow, 0.0, bins), h, w);
  const double forward =
      time_loss_at(propagate_events(slice, flow, static_cast<double>(bins - 1), bins), h, w);
  return backward + forward;
}

double variance_loss(const WarpedEvents& warped, int height, int width) {
  if (warped.size() == 0) return 0.0;
  const Image counts = count_image(warped, height, width);
  const double mean = counts.mean();
  return -((counts - mean).square().mean());
}

double smoothness_loss(const Image& channel, double eps) {
  if (eps <= 0.0) throw std::invalid_argument("smoothness_loss: eps must be positive");
  const int h = static_cast<int>(channel.rows());
  const int w = static_cast<int>(channel.cols());
  double loss = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x + 1 < w; ++x) loss += charbonnier(channel(y, x) - channel(y, x + 1), eps);
  for (int y = 0; y + 1 < h; ++y)
    for (int x = 0; x < w; ++x) loss += charbonnier(channel(y, x) - channel(y + 1, x), eps);
  return loss;
}

double smoothness_loss(const FlowField& flow, double eps) {
  return smoothness_loss(flow.u, eps) + smoothness_loss(flow.v, eps);
}

CensusImage census_transform(const Image& img, int window) {
  if (window < 3 || window % 2 == 0)
    throw std::invalid_argument("census_transform: window must be odd and >= 3");
  const int h = static_cast<int>(img.rows());
  const int w = static_cast<int>(img.cols());
  const int r = window / 2;
  CensusImage out;
  out.window = window;
  out.planes.assign(static_cast<std::size_t>(window * window), Image::Zero(h, w));
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      if (dy == 0 && dx == 0) continue;  // self entry stays 0
      Image& plane = out.planes[static_cast<std::size_t>((dy + r) * window + (dx + r))];
      for (int y = 0; y < h; ++y) {
        const int ny = y + dy;
        if (ny < 0 || ny >= h) continue;
        for (int x = 0; x < w; ++x) {
          const int nx = x + dx;
          if (nx < 0 || nx >= w) continue;
          const double diff = img(y, x) - img(ny, nx);
          plane(y, x) = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
        }
      }
    }
  }
  return out;
}

namespace {

// Linear interpolation along a row; caller guarantees 0 <= x <= W-1.
inline double sample_row(const Image& img, double x, int y) {
  const int w = static_cast<int>(img.cols());
  int j = static_cast<int>(std::floor(x));
  if (j > w - 2) j = w - 2;
  if (j < 0) j = 0;
  const double f = x - j;
  return (1.0 - f) * img(y, j) + f * img(y, j + 1);
}

// One direction of the census loss: reference census vs the other census
// sampled at x + sign * d_ref(x, y).
double census_half_loss(const CensusImage& ref, const CensusImage& other,
                        const DisparityField& disp_ref, double sign, double eps) {
  const int h = ref.height(), w = ref.width();
  const std::size_t n_elems = ref.planes.size();
  double loss = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double xs = x + sign * disp_ref(y, x);
      if (xs < 0.0 || xs > w - 1) continue;
      for (std::size_t e = 0; e < n_elems; ++e)
        loss += charbonnier(ref.planes[e](y, x) - sample_row(other.planes[e], xs, y), eps);
    }
  }
  return loss;
}

}  // namespace

double census_stereo_loss(const Image& left_count, const Image& right_count,
                          const DisparityField& disp_left, const DisparityField& disp_right,
                          int window, double eps) {
  if (left_count.rows() != right_count.rows() || left_count.cols() != right_count.cols())
    throw std::invalid_argument("census_stereo_loss: image sizes must match");
  const CensusImage census_left = census_transform(left_count, window);
  const CensusImage census_right = census_transform(right_count, window);
  return census_half_loss(census_left, census_right, disp_left, -1.0, eps) +
         census_half_loss(census_right, census_left, disp_right, +1.0, eps);
}

double lr_consistency_loss(const DisparityField& disp_left, const DisparityField& disp_right,
                           double eps) {
  if (disp_left.rows() != disp_right.rows() || disp_left.cols() != disp_right.cols())
    throw std::invalid_argument("lr_consistency_loss: sizes must match");
  const int h = static_cast<int>(disp_left.rows());
  const int w = static_cast<int>(disp_left.cols());
  double loss = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double xs_l = x - disp_left(y, x);
      if (xs_l >= 0.0 && xs_l <= w - 1)
        loss += charbonnier(disp_left(y, x) - sample_row(disp_right, xs_l, y), eps);
      const double xs_r = x + disp_right(y, x);
      if (xs_r >= 0.0 && xs_r <= w - 1)
        loss += charbonnier(disp_right(y, x) - sample_row(disp_left, xs_r, y), eps);
    }
  }
  return loss;
}

LossReport total_flow_loss(const EventSlice& slice, const FlowField& flow, int bins,
                           double lambda1, double eps) {
  if (lambda1 < 0.0) throw std::invalid_argument("total_flow_loss: lambda1 must be >= 0");
  LossReport report;
  report.weights.lambda1 = lambda1;
  report.terms["time"] = time_loss(slice, flow, bins);
  report.terms["smooth"] = smoothness_loss(flow, eps);
  report.total = report.terms["time"] + lambda1 * report.terms["smooth"];
  return report;
}

LossReport total_sfm_loss(const EventSlice& left, const EventSlice& right, const Pose& pose,
                          const DisparityField& disp_left, const DisparityField& disp_right,
                          const StereoRig& rig, int bins, const LossWeights& weights,
                          double eps, int census_window) {
  if (weights.lambda2 < 0.0 || weights.lambda3 < 0.0 || weights.lambda4 < 0.0)
    throw std::invalid_argument("total_sfm_loss: weights must be >= 0");
  rig.validate();
  const int h = static_cast<int>(disp_left.rows());
  const int w = static_cast<int>(disp_left.cols());

  const FlowFromPose flow_left =
      pose_disparity_to_flow(pose, disp_left, rig.left, rig.baseline_m, bins);
  const FlowFromPose flow_right =
      pose_disparity_to_flow(pose, disp_right, rig.right, rig.baseline_m, bins);

  LossReport report;
  report.weights = weights;
  report.terms["time"] =
      time_loss(left, flow_left.flow, bins) + time_loss(right, flow_right.flow, bins);

  // Census operates on the start-of-window deblurred count images.
  const Image left_count =
      count_image(propagate_events(left, flow_left.flow, 0.0, bins), h, w);
  const Image right_count =
      count_image(propagate_events(right, flow_right.flow, 0.0, bins), h, w);
  report.terms["stereo"] =
      census_stereo_loss(left_count, right_count, disp_left, disp_right, census_window, eps);
  report.terms["consistency"] = lr_consistency_loss(disp_left, disp_right, eps);
  report.terms["smooth"] = smoothness_loss(disp_left, eps) + smoothness_loss(disp_right, eps);

  report.total = report.terms["time"] + weights.lambda2 * report.terms["stereo"] +
                 weights.lambda3 * report.terms["consistency"] +
                 weights.lambda4 * report.terms["smooth"];
  return report;
}

}  // namespace evmc
