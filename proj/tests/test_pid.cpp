#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "swimtrack/env.hpp"
#include "swimtrack/pid.hpp"

using namespace swimtrack;
using namespace swimtrack::control;

TEST_CASE("pid basics: zero error, pure P, derivative on a ramp") {
  PidGains gains{2.0, 0.0, 0.0, 1.0, 10.0};
  PidState st;
  auto [c0, s0] = pid_step(gains, st, 0.0, 0.1);
  CHECK(c0 == 0.0);

  auto [c1, s1] = pid_step(gains, s0, 0.3, 0.1);
  CHECK(c1 == doctest::Approx(0.6).epsilon(1e-12));

  // Ramp e = t with kd = 1 and dt = 0.1: derivative term is exactly 1 from
  // the second call onward.
  PidGains dgains{0.0, 0.0, 1.0, 1.0, 10.0};
  PidState ds;
  double t = 0.0;
  auto [d0, ds0] = pid_step(dgains, ds, t, 0.1);
  CHECK(d0 == 0.0);  // first call: no derivative yet
  ds = ds0;
  for (int k = 1; k <= 10; ++k) {
    t = 0.1 * k;
    auto [cmd, next] = pid_step(dgains, ds, t, 0.1);
    CHECK(cmd == doctest::Approx(1.0).epsilon(1e-9));
    ds = next;
  }
}

TEST_CASE("pid rejects non-positive dt") {
  CHECK_THROWS_AS(pid_step(PidGains{}, PidState{}, 0.1, 0.0), std::invalid_argument);
}

TEST_CASE("anti-windup bounds the integral for any error sequence") {
  PidGains gains{0.5, 2.0, 0.1, 0.4, 0.8};
  PidState st;
  Rng rng(11);
  for (int i = 0; i < 5000; ++i) {
    const double e = rng.uniform(-5, 5) + (i < 2500 ? 3.0 : -3.0);  // sustained bias
    auto [cmd, next] = pid_step(gains, st, e, 0.04);
    st = next;
    CHECK(std::abs(st.integral) <= gains.integral_limit + 1e-12);
    CHECK(std::abs(cmd) <= gains.output_limit + 1e-12);
  }
}

TEST_CASE("doubling kp doubles the P contribution exactly") {
  PidGains g1{0.7, 0.0, 0.0, 1.0, 100.0};
  PidGains g2 = g1;
  g2.kp = 1.4;
  PidState s1, s2;
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const double e = rng.uniform(-1, 1);
    auto [c1, n1] = pid_step(g1, s1, e, 0.04);
    auto [c2, n2] = pid_step(g2, s2, e, 0.04);
    s1 = n1;
    s2 = n2;
    CHECK(c2 == doctest::Approx(2.0 * c1).epsilon(1e-12));
  }
}

TEST_CASE("tune_gains: single candidate, tie-break, and argmax guarantee") {
  const std::vector<PidGains> single{PidGains{1, 2, 3, 0.5, 0.5}};
  const auto r1 = tune_gains(single, [](const PidGains&) { return 0.0; });
  CHECK(r1.best.kp == 1.0);
  CHECK(r1.best.ki == 2.0);

  // Duplicates: the first of equal scores wins.
  std::vector<PidGains> dup{PidGains{1, 0, 0, 0.5, 0.5}, PidGains{1, 0, 0, 0.5, 0.5},
                            PidGains{2, 0, 0, 0.5, 0.5}};
  int calls = 0;
  const auto r2 = tune_gains(dup, [&](const PidGains&) {
    ++calls;
    return calls == 3 ? 0.0 : 1.0;  // first two tie at 1.0
  });
  CHECK(r2.best.kp == 1.0);
  CHECK(r2.scores.size() == 3);

  CHECK_THROWS_AS(tune_gains({}, [](const PidGains&) { return 0.0; }), std::invalid_argument);
}

TEST_CASE("tuner beats every rejected candidate on a first-order plant") {
  // Scalar closed-loop plant: w' = (K(cmd - w) - d w)/I, PID tracks w_ref.
  const auto score = [](const PidGains& g) {
    const double K = 3.0, d = 0.8, I = 0.45, dt = 0.02;
    double w = 0.0, total = 0.0;
    PidState st;
    for (int i = 0; i < 800; ++i) {
      const double w_ref = (i / 200) % 2 == 0 ? 0.4 : -0.2;
      auto [cmd, next] = pid_step(g, st, w_ref - w, dt);
      st = next;
      w += dt * (K * (cmd - w) - d * w) / I;
      total -= std::abs(w_ref - w);
    }
    return total;
  };
  const auto grid = gain_grid({0.5, 1.0, 2.0}, {0.0, 0.5, 1.0}, {0.0, 0.05, 0.1}, 0.5, 1.5);
  CHECK(grid.size() == 27);
  const auto result = tune_gains(grid, score);
  const double best_score = *std::max_element(result.scores.begin(), result.scores.end());
  CHECK(score(result.best) == doctest::Approx(best_score));
  for (double s : result.scores) CHECK(s <= best_score + 1e-12);
}

TEST_CASE("tracking controller: neutral at the reference, sign drives centering") {
  const double area_ref = 0.05;
  PidTrackingController ctl(PidGains{0.8, 0.0, 0.0, 0.5, 0.6}, PidGains{0.8, 0.0, 0.0, 0.5, 0.6},
                            PidGains{20.0, 0.0, 0.0, 0.05, 1.2}, area_ref, 0.04);
  tracker::TrackState track;
  track.x[2] = area_ref;
  const auto neutral = ctl.update(track, false);
  CHECK(neutral.yaw_rate == 0.0);
  CHECK(neutral.pitch_rate == 0.0);
  CHECK(neutral.forward_speed == 0.0);

  // Target right of center (x_c > 0): yaw command must be negative to sweep
  // the camera rightward and bring the target back leftward in the image.
  ctl.reset();
  track.x[0] = 0.4;
  CHECK(ctl.update(track, false).yaw_rate < 0.0);

  // Target too small (too far): swim forward.
  ctl.reset();
  track.x[0] = 0.0;
  track.x[2] = 0.02;
  CHECK(ctl.update(track, false).forward_speed > 0.0);

  CHECK_THROWS_AS(ctl.update(track, true), std::invalid_argument);
}

TEST_CASE("closed loop: PID centers a static target on the simulator") {
  harness::ScenarioParams params;
  params.vnoise = vision::VisionNoise{};  // noise off
  params.field.noise_sigma = 0.0;
  params.target_motion.speed_box.setZero();
  params.initial_range = 3.0;

  harness::TrackingEnv env(params, 0, 42);
  control::PidTrackingController pid(params.yaw_gains, params.pitch_gains, params.forward_gains,
                                     params.area_ref, params.dt);

  // Start with the target well off center by yawing the robot first.
  sim::RobotState& robot = const_cast<sim::RobotState&>(env.robot());
  robot.orientation = Eigen::Quaterniond(Eigen::AngleAxisd(0.35, Eigen::Vector3d::UnitZ()));

  double x_f = 1.0, y_f = 1.0;
  for (int t = 0; t < 300; ++t) {
    const auto sense = env.sense();
    REQUIRE(sense.has_track);
    x_f = sense.x_f;
    y_f = sense.y_f;
    auto cmd = pid.update_with_setpoint(sense.x_f, sense.y_f, 0.0, 0.0);
    cmd.forward_speed = pid.update_forward(sense.area_f);
    env.apply(cmd);
  }
  CHECK(std::abs(x_f) < 0.05);
  CHECK(std::abs(y_f) < 0.05);
}
