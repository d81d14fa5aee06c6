#include <doctest.h>

#include <cmath>

#include "swimtrack/vision.hpp"

using namespace swimtrack;
using namespace swimtrack::vision;

namespace {

struct Scene {
  sim::RobotState robot;
  sim::TargetState target;
  CameraModel cam;
  ConfidenceField field;
  VisionNoise noise;   // all zero by default
  TargetShape shape;
};

Scene noiseless_scene() {
  Scene s;
  s.target.position = Eigen::Vector3d(3.0, 0.0, 0.0);
  s.field.noise_sigma = 0.0;
  return s;
}

// Places the target at a bearing that projects to the requested normalized
// image coordinates at the given range.
void place_at(Scene& s, double x_c, double y_c, double range) {
  const double az = x_c * 0.5 * s.cam.horizontal_fov;
  const double el = y_c * 0.5 * s.cam.vertical_fov;
  const Eigen::Vector3d d(std::cos(el) * std::cos(az), -std::cos(el) * std::sin(az), std::sin(el));
  s.target.position = s.robot.position + range * d;
}

}  // namespace

TEST_CASE("target on the optical axis projects to the image center") {
  Scene s = noiseless_scene();
  Rng rng(1);
  const auto obs = observe(s.robot, s.target, s.cam, s.field, s.noise, s.shape, rng);
  REQUIRE(obs.detected);
  CHECK(obs.x_c == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(obs.y_c == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(obs.aspect > 0.0);
}

TEST_CASE("placement helper and projection agree") {
  Scene s = noiseless_scene();
  Rng rng(1);
  for (double x : {-0.7, -0.2, 0.3, 0.8}) {
    for (double y : {-0.5, 0.0, 0.6}) {
      place_at(s, x, y, 3.0);
      const auto obs = observe(s.robot, s.target, s.cam, s.field, s.noise, s.shape, rng);
      REQUIRE(obs.detected);
      CHECK(obs.x_c == doctest::Approx(x).epsilon(1e-9));
      CHECK(obs.y_c == doctest::Approx(y).epsilon(1e-9));
    }
  }
}

TEST_CASE("targets behind the camera or out of range are not detected") {
  Scene s = noiseless_scene();
  Rng rng(1);
  s.target.position = Eigen::Vector3d(-2.0, 0.0, 0.0);
  CHECK_FALSE(observe(s.robot, s.target, s.cam, s.field, s.noise, s.shape, rng).detected);

  s.target.position = Eigen::Vector3d(s.cam.max_range + 1.0, 0.0, 0.0);
  CHECK_FALSE(observe(s.robot, s.target, s.cam, s.field, s.noise, s.shape, rng).detected);

  place_at(s, 1.4, 0.0, 3.0);  // outside the horizontal frustum
  CHECK_FALSE(observe(s.robot, s.target, s.cam, s.field, s.noise, s.shape, rng).detected);
}

TEST_CASE("left bias lowers confidence by the expected amount") {
  ConfidenceField field;
  field.base_confidence = 0.75;
  field.left_bias_strength = 0.4;
  CHECK(field.evaluate(0.5, 0.0) - field.evaluate(-0.5, 0.0) == doctest::Approx(0.2).epsilon(1e-12));

  // End to end through the projection.
  Scene s = noiseless_scene();
  s.field = field;
  Rng rng(1);
  place_at(s, -0.5, 0.0, 3.0);
  const auto left = observe(s.robot, s.target, s.cam, s.field, s.noise, s.shape, rng);
  place_at(s, 0.5, 0.0, 3.0);
  const auto right = observe(s.robot, s.target, s.cam, s.field, s.noise, s.shape, rng);
  REQUIRE(left.detected);
  REQUIRE(right.detected);
  CHECK(right.confidence - left.confidence == doctest::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("confidence is monotone in x_c when the left bias is active") {
  ConfidenceField field;
  field.left_bias_strength = 0.3;
  double prev = -1.0;
  for (double x = -1.0; x <= 1.0; x += 0.05) {
    const double c = field.evaluate(x, 0.0);
    CHECK(c >= prev);
    prev = c;
  }
  CHECK(field.evaluate(1.0, 5.0) == 1.0);   // clamped
  CHECK(field.evaluate(-1.0, -5.0) == 0.0);
}

TEST_CASE("doubling the distance quarters the area (pinhole oracle)") {
  Scene s = noiseless_scene();
  Rng rng(1);
  const double d1 = 2.5;
  place_at(s, 0.0, 0.0, d1);
  const auto near = observe(s.robot, s.target, s.cam, s.field, s.noise, s.shape, rng);
  place_at(s, 0.0, 0.0, 2.0 * d1);
  const auto far = observe(s.robot, s.target, s.cam, s.field, s.noise, s.shape, rng);
  REQUIRE(near.detected);
  REQUIRE(far.detected);
  CHECK(near.area == doctest::Approx(4.0 * far.area).epsilon(1e-12));

  // Closed-form pinhole value.
  const double expected = (s.shape.lateral_radius / (d1 * std::tan(0.5 * s.cam.horizontal_fov))) *
                          (s.shape.vertical_radius / (d1 * std::tan(0.5 * s.cam.vertical_fov)));
  CHECK(near.area == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("mirrored scenes mirror in x_c exactly when unbiased") {
  Scene s = noiseless_scene();
  Rng rng1(9), rng2(9);
  place_at(s, 0.37, 0.21, 3.3);
  const auto a = observe(s.robot, s.target, s.cam, s.field, s.noise, s.shape, rng1);
  Scene m = s;
  m.target.position.y() = -m.target.position.y();
  const auto b = observe(m.robot, m.target, m.cam, m.field, m.noise, m.shape, rng2);
  REQUIRE(a.detected);
  REQUIRE(b.detected);
  CHECK(a.x_c == doctest::Approx(-b.x_c).epsilon(1e-12));
  CHECK(a.y_c == doctest::Approx(b.y_c).epsilon(1e-12));
  CHECK(a.area == doctest::Approx(b.area).epsilon(1e-12));
  CHECK(a.confidence == doctest::Approx(b.confidence).epsilon(1e-12));
}

TEST_CASE("observation sequences are deterministic under a seed") {
  Scene s = noiseless_scene();
  s.noise.center_sigma = 0.02;
  s.noise.area_rel_sigma = 0.08;
  s.noise.p_drop = 0.3;
  s.field.noise_sigma = 0.05;
  Rng a(77), b(77);
  for (int i = 0; i < 500; ++i) {
    const auto oa = observe(s.robot, s.target, s.cam, s.field, s.noise, s.shape, a);
    const auto ob = observe(s.robot, s.target, s.cam, s.field, s.noise, s.shape, b);
    CHECK(oa.detected == ob.detected);
    if (oa.detected) {
      CHECK(oa.x_c == ob.x_c);
      CHECK(oa.area == ob.area);
      CHECK(oa.confidence == ob.confidence);
    }
  }
}

TEST_CASE("dropout rate follows the confidence-coupled model") {
  Scene s = noiseless_scene();
  s.field.base_confidence = 0.7;
  s.noise.p_drop = 1.0;
  Rng rng(123);
  int detected = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    if (observe(s.robot, s.target, s.cam, s.field, s.noise, s.shape, rng).detected) ++detected;
  }
  // P(detect) = 1 - (1 - 0.7) * 1.0
  CHECK(double(detected) / n == doctest::Approx(0.7).epsilon(0.01));
}
