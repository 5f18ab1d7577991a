#include <doctest.h>

#include <cmath>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "evmc/egomotion.hpp"
#include "evmc/metrics.hpp"
#include "test_util.hpp"

using namespace evmc;

TEST_CASE("flow_to_displacement formula arithmetic") {
  const FlowField flow = FlowField::constant(4, 4, 1.0, 0.0);
  SUBCASE("u=1 px/bin, B=9, dt=0.25 s over a 0.5 s window gives 4 px") {
    const FlowField disp = flow_to_displacement(flow, 9, 0.25, 0.5);
    CHECK(disp.u(0, 0) == doctest::Approx(4.0));
  }
  SUBCASE("dt equal to the window with B=2 is the identity") {
    const FlowField disp = flow_to_displacement(flow, 2, 0.5, 0.5);
    CHECK(disp.u(2, 3) == doctest::Approx(1.0));
  }
  SUBCASE("zero flow maps to zero displacement") {
    const FlowField disp = flow_to_displacement(FlowField(4, 4), 9, 0.1, 0.2);
    CHECK(disp.u.abs().maxCoeff() == 0.0);
  }
  SUBCASE("zero-duration window is an error") {
    CHECK_THROWS_AS(flow_to_displacement(flow, 9, 0.25, 0.0), std::invalid_argument);
  }
}

TEST_CASE("aee closed-form examples") {
  SUBCASE("pred equals gt") {
    const FlowField f = FlowField::constant(3, 3, 1.0, -2.0);
    const MaskImage mask = MaskImage::Constant(3, 3, 1);
    const FlowError err = aee(f, f, mask);
    CHECK(err.aee == 0.0);
    CHECK(err.outlier_fraction == 0.0);
  }
  SUBCASE("single masked pixel with a 3-4-5 error") {
    FlowField pred(2, 2), gt(2, 2);
    pred.u(0, 0) = 3.0;
    pred.v(0, 0) = 4.0;
    MaskImage mask = MaskImage::Zero(2, 2);
    mask(0, 0) = 1;
    const FlowError err = aee(pred, gt, mask);
    CHECK(err.aee == doctest::Approx(5.0));
    CHECK(err.outlier_fraction == 1.0);
    CHECK(err.pixels == 1);
  }
  SUBCASE("two pixels with errors 1 and 5") {
    FlowField pred(1, 2), gt(1, 2);
    pred.u(0, 0) = 1.0;
    pred.u(0, 1) = 5.0;
    const MaskImage mask = MaskImage::Constant(1, 2, 1);
    const FlowError err = aee(pred, gt, mask);
    CHECK(err.aee == doctest::Approx(3.0));
    CHECK(err.outlier_fraction == doctest::Approx(0.5));
  }
  SUBCASE("empty mask is an error") {
    const FlowField f(2, 2);
    CHECK_THROWS_AS(aee(f, f, MaskImage::Zero(2, 2)), std::invalid_argument);
  }
}

TEST_CASE("aee is permutation invariant and zero iff equal on the mask") {
  std::mt19937_64 rng(7);
  const FlowField pred = evmc::testing::random_flow(rng, 6, 6, 2.0);
  FlowField gt = pred;
  const MaskImage mask = MaskImage::Constant(6, 6, 1);
  CHECK(aee(pred, gt, mask).aee == 0.0);
  gt.u(3, 3) += 1e-6;
  CHECK(aee(pred, gt, mask).aee > 0.0);
}

TEST_CASE("depth_error thresholds") {
  SUBCASE("pred equals gt gives zero everywhere") {
    const Image depth = Image::Constant(4, 4, 7.0);
    const MaskImage mask = MaskImage::Constant(4, 4, 1);
    const auto errs = depth_error(depth, depth, mask, kDefaultDepthThresholdsM);
    REQUIRE(errs.size() == 3);
    for (const auto& e : errs) {
      REQUIRE(e.has_value());
      CHECK(*e == 0.0);
    }
  }
  SUBCASE("single pixel at 15 m with error 2 is absent below 10 m") {
    Image gt = Image::Constant(1, 1, 15.0);
    Image pred = Image::Constant(1, 1, 17.0);
    const MaskImage mask = MaskImage::Constant(1, 1, 1);
    const auto errs = depth_error(pred, gt, mask, {10.0, 20.0, 30.0});
    CHECK_FALSE(errs[0].has_value());
    REQUIRE(errs[1].has_value());
    CHECK(*errs[1] == doctest::Approx(2.0));
    CHECK(*errs[2] == doctest::Approx(2.0));
  }
  SUBCASE("event mask excludes pixels") {
    Image gt = Image::Constant(2, 1, 5.0);
    Image pred = gt;
    pred(0, 0) += 4.0;
    MaskImage mask = MaskImage::Zero(2, 1);
    mask(1, 0) = 1;
    const auto errs = depth_error(pred, gt, mask, {10.0});
    REQUIRE(errs[0].has_value());
    CHECK(*errs[0] == 0.0);
  }
}

TEST_CASE("rpe closed-form examples") {
  CHECK(rpe(Vec3(1, 0, 0), Vec3(2, 0, 0)) == doctest::Approx(0.0));
  CHECK(rpe(Vec3(1, 0, 0), Vec3(0, 3, 0)) == doctest::Approx(M_PI / 2.0));
  CHECK(rpe(5.0 * Vec3(0.3, -0.2, 0.9), Vec3(0.3, -0.2, 0.9)) == doctest::Approx(0.0));
  CHECK_THROWS_AS(rpe(Vec3::Zero(), Vec3(1, 0, 0)), std::invalid_argument);
}

TEST_CASE("rpe is invariant to positive rescaling") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    const Vec3 a(evmc::testing::uniform(rng, -1, 1), evmc::testing::uniform(rng, -1, 1),
                 evmc::testing::uniform(rng, -1, 1));
    const Vec3 b(evmc::testing::uniform(rng, -1, 1), evmc::testing::uniform(rng, -1, 1),
                 evmc::testing::uniform(rng, -1, 1));
    if (a.norm() < 1e-6 || b.norm() < 1e-6) continue;
    const double scale = evmc::testing::uniform(rng, 0.01, 50.0);
    CHECK(rpe(scale * a, b) == doctest::Approx(rpe(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("rre closed-form: single-axis rotation gives sqrt(2) theta") {
  for (double theta : {0.001, 0.01, 0.3, 1.5, 2.9}) {
    const Mat3 r = euler_to_rotation(0.0, 0.0, theta);
    CHECK(rre(Mat3::Identity(), r) == doctest::Approx(std::sqrt(2.0) * theta).epsilon(1e-9));
  }
  CHECK(rre(Mat3::Identity(), Mat3::Identity()) == 0.0);
}

TEST_CASE("rre is symmetric and right-invariant") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 50; ++i) {
    const Mat3 a = euler_to_rotation(evmc::testing::uniform(rng, -1, 1),
                                     evmc::testing::uniform(rng, -1, 1),
                                     evmc::testing::uniform(rng, -1, 1));
    const Mat3 b = euler_to_rotation(evmc::testing::uniform(rng, -1, 1),
                                     evmc::testing::uniform(rng, -1, 1),
                                     evmc::testing::uniform(rng, -1, 1));
    const Mat3 q = euler_to_rotation(evmc::testing::uniform(rng, -1, 1),
                                     evmc::testing::uniform(rng, -1, 1),
                                     evmc::testing::uniform(rng, -1, 1));
    CHECK(rre(a, b) == doctest::Approx(rre(b, a)).epsilon(1e-9));
    CHECK(rre(q * a, q * b) == doctest::Approx(rre(a, b)).epsilon(1e-9));
  }
}

TEST_CASE("rotation_log cross-checked against the general matrix log") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 100; ++i) {
    const Mat3 r = euler_to_rotation(evmc::testing::uniform(rng, -1.5, 1.5),
                                     evmc::testing::uniform(rng, -1.2, 1.2),
                                     evmc::testing::uniform(rng, -1.5, 1.5));
    const Mat3 ours = rotation_log(r);
    const Mat3 general = r.log();
    CHECK((ours - general).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("series fallback near zero") {
    const Mat3 r = euler_to_rotation(1e-9, -2e-9, 1e-9);
    const Mat3 ours = rotation_log(r);
    CHECK((ours + ours.transpose()).cwiseAbs().maxCoeff() < 1e-15);  // skew
    CHECK(ours.norm() == doctest::Approx((r.log()).norm()).epsilon(1e-6));
  }
  SUBCASE("axis recovery near pi") {
    const Mat3 r = euler_to_rotation(0.0, 0.0, M_PI - 1e-7);
    CHECK(rre(Mat3::Identity(), r) ==
          doctest::Approx(std::sqrt(2.0) * (M_PI - 1e-7)).epsilon(1e-6));
  }
}

TEST_CASE("rre rejects non-orthonormal input") {
  Mat3 bad = Mat3::Identity();
  bad(0, 1) = 0.01;
  CHECK_THROWS_AS(rre(bad, Mat3::Identity()), std::invalid_argument);
}
