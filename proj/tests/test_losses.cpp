#include <doctest.h>

#include <random>

#include "evmc/losses.hpp"
#include "evmc/synth.hpp"
#include "test_util.hpp"

#include <json.hpp>

using namespace evmc;

namespace {

// Box blur with in-frame neighborhood averaging.
Image box_blur(const Image& img) {
  const int h = static_cast<int>(img.rows()), w = static_cast<int>(img.cols());
  Image out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double sum = 0.0;
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int yy = y + dy, xx = x + dx;
          if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
          sum += img(yy, xx);
          ++n;
        }
      out(y, x) = sum / n;
    }
  return out;
}

}  // namespace

TEST_CASE("charbonnier basics") {
  CHECK(charbonnier(0.0, 0.001) == 0.001);
  CHECK(charbonnier(3.0, 4.0) == doctest::Approx(5.0));
  CHECK(charbonnier(-3.0, 4.0) == doctest::Approx(5.0));
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const double x = evmc::testing::uniform(rng, -10, 10);
    CHECK(charbonnier(x, 0.5) >= 0.5);
    CHECK(charbonnier(x, 0.5) == charbonnier(-x, 0.5));
  }
}

TEST_CASE("time_loss_at simple cases") {
  SUBCASE("empty event set") {
    const WarpedEvents none;
    CHECK(time_loss_at(none, 8, 8) == 0.0);
  }
  SUBCASE("one positive event at an interior integer pixel, s = 0.5") {
    WarpedEvents w;
    w.x = {4.0};
    w.y = {4.0};
    w.s = {0.5};
    w.p = {1};
    CHECK(time_loss_at(w, 9, 9) == doctest::Approx(0.25));
  }
}

TEST_CASE("time_loss is additive over the two reference times") {
  const auto scene = gen_constant_flow(10, 30, Vec2(1.0, 0.0), 9, 64, 64, 3, 0.0, 1.0);
  const FlowField flow = FlowField::constant(64, 64, 0.4, -0.2);
  const double backward =
      time_loss_at(propagate_events(scene.slice, flow, 0.0, 9), 64, 64);
  const double forward =
      time_loss_at(propagate_events(scene.slice, flow, 8.0, 9), 64, 64);
  CHECK(backward >= 0.0);
  CHECK(forward >= 0.0);
  CHECK(time_loss(scene.slice, flow, 9) == doctest::Approx(backward + forward));
}

TEST_CASE("time_loss of an empty slice is zero") {
  const EventSlice empty;
  CHECK(time_loss(empty, FlowField(16, 16), 9) == 0.0);
}

TEST_CASE("synth oracle: loss at the true flow beats zero flow") {
  const auto scene = gen_constant_flow(20, 50, Vec2(2.0, -1.0), 9, 96, 96, 5, 0.0, 1.0);
  const double at_truth = time_loss(scene.slice, scene.flow_gt, 9);
  const double at_zero = time_loss(scene.slice, FlowField(96, 96), 9);
  CHECK(at_truth < at_zero);
}

TEST_CASE("dense sweep oracle: scaling the true flow is minimized near 1") {
  const auto scene = gen_constant_flow(40, 60, Vec2(1.6, -0.8), 9, 96, 96, 7, 0.0, 1.0);
  double best_alpha = -1.0, best_loss = 1e300;
  for (int i = 0; i <= 60; ++i) {
    const double alpha = i / 40.0;  // sweep [0, 1.5]
    const FlowField flow =
        FlowField::constant(96, 96, alpha * scene.flow.x(), alpha * scene.flow.y());
    const double loss = time_loss(scene.slice, flow, 9);
    if (loss < best_loss) {
      best_loss = loss;
      best_alpha = alpha;
    }
  }
  CHECK(best_alpha == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("time_loss is invariant under event order permutation") {
  const auto scene = gen_constant_flow(10, 20, Vec2(0.7, 0.5), 9, 48, 48, 9, 0.0, 1.0);
  const FlowField flow = FlowField::constant(48, 48, 0.3, 0.1);
  const double base = time_loss(scene.slice, flow, 9);
  std::mt19937_64 rng(10);
  std::vector<Event> shuffled = scene.slice.events;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const EventSlice reordered = EventSlice::from_events(std::move(shuffled));
  CHECK(time_loss(reordered, flow, 9) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("time_loss is invariant to positive rescaling of timestamps") {
  const auto scene = gen_constant_flow(10, 20, Vec2(1.0, -0.3), 9, 48, 48, 11, 0.0, 1.0);
  const FlowField flow = FlowField::constant(48, 48, 0.8, 0.0);
  const double base = time_loss(scene.slice, flow, 9);
  std::vector<Event> scaled = scene.slice.events;
  for (Event& e : scaled) e.t *= 37.5;
  const EventSlice rescaled = EventSlice::from_events(std::move(scaled));
  CHECK(time_loss(rescaled, flow, 9) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("variance loss") {
  SUBCASE("empty slice gives zero") {
    const WarpedEvents none;
    CHECK(variance_loss(none, 8, 8) == 0.0);
  }
  SUBCASE("deblurring with the true flow is more negative than zero flow") {
    const auto scene = gen_constant_flow(12, 60, Vec2(1.5, -0.5), 9, 64, 64, 13, 0.0, 1.0);
    const double at_truth =
        variance_loss(propagate_events(scene.slice, scene.flow_gt, 0.0, 9), 64, 64);
    const double at_zero =
        variance_loss(propagate_events(scene.slice, FlowField(64, 64), 0.0, 9), 64, 64);
    CHECK(at_truth < at_zero);
  }
  SUBCASE("bounded below by the count-image peak") {
    const auto scene = gen_constant_flow(8, 30, Vec2(0.5, 0.5), 9, 32, 32, 15, 0.0, 1.0);
    const WarpedEvents warped = propagate_events(scene.slice, scene.flow_gt, 0.0, 9);
    const Image counts = count_image(warped, 32, 32);
    const double bound = counts.maxCoeff() * counts.maxCoeff() / 4.0;
    CHECK(variance_loss(warped, 32, 32) >= -bound);
  }
}

TEST_CASE("smoothness of a constant field sits at the charbonnier floor") {
  const double eps = 1e-3;
  const FlowField flow = FlowField::constant(2, 2, 5.0, -3.0);
  // 4 unordered neighbor pairs in a 2x2 grid, two channels each.
  CHECK(smoothness_loss(flow, eps) == doctest::Approx(8.0 * eps));
}

TEST_CASE("smoothness of a 1x2 step approaches the step size as eps vanishes") {
  FlowField flow(1, 2);
  flow.u << 0.0, 1.0;
  flow.v.setZero();
  const double eps = 1e-9;
  CHECK(smoothness_loss(flow, eps) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("empirical oracle: box blur never raises smoothness") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    FlowField flow = evmc::testing::random_flow(rng, 12, 12, 4.0);
    double previous = smoothness_loss(flow, 1e-3);
    for (int pass = 0; pass < 3; ++pass) {
      flow.u = box_blur(flow.u);
      flow.v = box_blur(flow.v);
      const double blurred = smoothness_loss(flow, 1e-3);
      CHECK(blurred <= previous * (1.0 + 1e-12));
      previous = blurred;
    }
  }
}

TEST_CASE("census transform") {
  SUBCASE("constant image has an all-zero census") {
    const Image img = Image::Constant(6, 6, 3.5);
    const CensusImage census = census_transform(img, 3);
    for (const auto& plane : census.planes) CHECK(plane.abs().maxCoeff() == 0.0);
  }
  SUBCASE("1x3 ridge") {
    Image img(1, 3);
    img << 0.0, 5.0, 0.0;
    const CensusImage census = census_transform(img, 3);
    // Window rows off the image give 0; center row: (left, self, right).
    const int left = 3 * 1 + 0, self = 3 * 1 + 1, right = 3 * 1 + 2;
    CHECK(census.planes[left](0, 1) == 1.0);
    CHECK(census.planes[self](0, 1) == 0.0);
    CHECK(census.planes[right](0, 1) == 1.0);
  }
  SUBCASE("shift invariance") {
    std::mt19937_64 rng(19);
    const Image img = evmc::testing::random_image(rng, 8, 8, 0.0, 4.0);
    const CensusImage a = census_transform(img, 5);
    const CensusImage b = census_transform(img + 17.25, 5);
    for (std::size_t e = 0; e < a.planes.size(); ++e)
      CHECK((a.planes[e] - b.planes[e]).abs().maxCoeff() == 0.0);
  }
  SUBCASE("monotone remap invariance") {
    std::mt19937_64 rng(23);
    const Image img = evmc::testing::random_image(rng, 8, 8, 0.1, 4.0);
    const CensusImage a = census_transform(img, 3);
    const CensusImage b = census_transform(img.log(), 3);
    for (std::size_t e = 0; e < a.planes.size(); ++e)
      CHECK((a.planes[e] - b.planes[e]).abs().maxCoeff() == 0.0);
  }
  SUBCASE("window must be odd and >= 3") {
    CHECK_THROWS_AS(census_transform(Image::Zero(4, 4), 4), std::invalid_argument);
    CHECK_THROWS_AS(census_transform(Image::Zero(4, 4), 1), std::invalid_argument);
  }
}

TEST_CASE("census stereo loss") {
  const double eps = 1e-3;
  SUBCASE("identical images at zero disparity sit at the floor") {
    std::mt19937_64 rng(29);
    const Image img = evmc::testing::random_image(rng, 10, 12, 0.0, 3.0);
    const DisparityField zero = Image::Zero(10, 12);
    const double loss = census_stereo_loss(img, img, zero, zero, 3, eps);
    // Every pixel valid in both directions, 9 elements each.
    CHECK(loss == doctest::Approx(2.0 * 10 * 12 * 9 * eps));
  }
  SUBCASE("zero-event images sit at the floor") {
    const Image img = Image::Zero(6, 6);
    const DisparityField zero = Image::Zero(6, 6);
    const double loss = census_stereo_loss(img, img, zero, zero, 5, eps);
    CHECK(loss == doctest::Approx(2.0 * 6 * 6 * 25 * eps));
  }
  SUBCASE("shift-construction oracle: true disparity beats zero") {
    std::mt19937_64 rng(31);
    const int h = 16, w = 32, d = 4;
    Image left = Image::Zero(h, w);
    // Sparse bright blobs, shifted content: right(x) = left(x + d).
    for (int k = 0; k < 12; ++k) {
      const int x = 6 + static_cast<int>(evmc::testing::uniform(rng, 0, w - 12));
      const int y = 1 + static_cast<int>(evmc::testing::uniform(rng, 0, h - 2));
      left(y, x) = 1.0 + evmc::testing::uniform(rng, 0.0, 2.0);
    }
    Image right = Image::Zero(h, w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x + d < w; ++x) right(y, x) = left(y, x + d);
    const DisparityField at_truth = Image::Constant(h, w, static_cast<double>(d));
    const DisparityField at_zero = Image::Zero(h, w);
    const double loss_truth = census_stereo_loss(left, right, at_truth, at_truth, 5, eps);
    const double loss_zero = census_stereo_loss(left, right, at_zero, at_zero, 5, eps);
    CHECK(loss_truth < loss_zero);
  }
}

TEST_CASE("left-right consistency loss") {
  const double eps = 1e-3;
  SUBCASE("zero disparities sit at the floor") {
    const DisparityField zero = Image::Zero(5, 7);
    CHECK(lr_consistency_loss(zero, zero, eps) == doctest::Approx(2.0 * 5 * 7 * eps));
  }
  SUBCASE("consistent constant disparity sits at the floor") {
    const DisparityField d = Image::Constant(6, 20, 3.0);
    const double loss = lr_consistency_loss(d, d, eps);
    // Left term valid for x >= 3, right term for x <= W-1-3.
    CHECK(loss == doctest::Approx(2.0 * 6 * 17 * eps));
  }
  SUBCASE("inconsistent disparities pay roughly rho(2) per valid pixel") {
    const int h = 4, w = 16;
    const DisparityField dl = Image::Constant(h, w, 2.0);
    const DisparityField dr = Image::Zero(h, w);
    const double loss = lr_consistency_loss(dl, dr, eps);
    // Left term: rho(2) for x >= 2; right term: rho(-2) everywhere.
    const double expected = h * (w - 2) * charbonnier(2.0, eps) + h * w * charbonnier(2.0, eps);
    CHECK(loss == doctest::Approx(expected));
  }
}

TEST_CASE("total_flow_loss composes its terms") {
  const auto scene = gen_constant_flow(10, 20, Vec2(0.6, 0.2), 9, 48, 48, 37, 0.0, 1.0);
  const FlowField flow = FlowField::constant(48, 48, 0.2, 0.2);
  SUBCASE("lambda1 = 0 reduces to the time loss") {
    const LossReport report = total_flow_loss(scene.slice, flow, 9, 0.0, 1e-3);
    CHECK(report.total == report.terms.at("time"));
    CHECK(report.terms.at("time") == doctest::Approx(time_loss(scene.slice, flow, 9)));
  }
  SUBCASE("default weight adds the smoothness term") {
    const LossReport report = total_flow_loss(scene.slice, flow, 9, 1.0, 1e-3);
    CHECK(report.total ==
          doctest::Approx(report.terms.at("time") + report.terms.at("smooth")).epsilon(1e-12));
  }
  SUBCASE("empty slice leaves only the smoothness floor") {
    const EventSlice empty;
    const LossReport report = total_flow_loss(empty, flow, 9, 0.5, 1e-3);
    CHECK(report.terms.at("time") == 0.0);
    CHECK(report.total == doctest::Approx(0.5 * report.terms.at("smooth")));
  }
}

TEST_CASE("loss report serializes terms as json keys") {
  const EventSlice empty;
  const LossReport report = total_flow_loss(empty, FlowField(4, 4), 9, 1.0, 1e-3);
  const auto j = nlohmann::json::parse(to_json(report));
  CHECK(j.contains("total"));
  CHECK(j["terms"].contains("time"));
  CHECK(j["terms"].contains("smooth"));
  CHECK(j["weights"]["lambda1"] == 1.0);
  CHECK(j["weights"]["lambda3"] == 0.1);
}

TEST_CASE("total_sfm_loss composes the stereo objective") {
  SynthScene scene;
  scene.n_sources = 12;
  scene.events_per_source = 30;
  scene.height = scene.width = 48;
  scene.flow = Vec2(0.0, 0.0);  // static scene: the identity pose is the truth
  scene.seed = 41;
  StereoRig rig;
  rig.left = default_intrinsics(48, 48);
  rig.right = rig.left;
  rig.baseline_m = 0.1;
  const StereoScene stereo = gen_stereo_pair(scene, rig, 3.0, 7);
  const Pose pose;  // identity
  const DisparityField d = Image::Constant(48, 48, 3.0);

  SUBCASE("all lambdas zero leaves only the temporal term") {
    const LossWeights weights{1.0, 0.0, 0.0, 0.0};
    const LossReport report =
        total_sfm_loss(stereo.left, stereo.right, pose, d, d, rig, 9, weights, 1e-3, 5);
    CHECK(report.total == report.terms.at("time"));
  }
  SUBCASE("weighted sum reproduces the hand total") {
    const LossWeights weights{1.0, 1.0, 0.1, 0.2};
    const LossReport report =
        total_sfm_loss(stereo.left, stereo.right, pose, d, d, rig, 9, weights, 1e-3, 5);
    const double hand = report.terms.at("time") + 1.0 * report.terms.at("stereo") +
                        0.1 * report.terms.at("consistency") + 0.2 * report.terms.at("smooth");
    CHECK(report.total == doctest::Approx(hand).epsilon(1e-12));
  }
  SUBCASE("identity pose with true disparity beats a perturbed pose") {
    const LossWeights weights{1.0, 1.0, 0.1, 0.2};
    const LossReport at_truth =
        total_sfm_loss(stereo.left, stereo.right, pose, d, d, rig, 9, weights, 1e-3, 5);
    Pose off;
    off.translation = Vec3(0.3, 0.0, 0.0);
    const LossReport perturbed =
        total_sfm_loss(stereo.left, stereo.right, off, d, d, rig, 9, weights, 1e-3, 5);
    CHECK(at_truth.total < perturbed.total);
  }
}

TEST_CASE("losses stay finite on random inputs") {
  std::mt19937_64 rng(43);
  const auto scene = gen_constant_flow(8, 15, Vec2(0.5, -0.5), 9, 32, 32, 47, 5.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const FlowField flow = evmc::testing::random_flow(rng, 32, 32, 6.0);
    const double loss = time_loss(scene.slice, flow, 9);
    CHECK(std::isfinite(loss));
    CHECK(loss >= 0.0);
    CHECK(std::isfinite(smoothness_loss(flow, 1e-3)));
  }
}
