#include <doctest.h>

#include <cmath>
#include <vector>

#include "swimtrack/sim.hpp"

using namespace swimtrack;
using namespace swimtrack::sim;

namespace {

// Scalar semi-implicit Euler oracle for one axis of drag-only motion:
// force evaluated at the current velocity, velocity updated first.
double scalar_drag_step(double v, double rho, double cd, double area, double mass, double dt) {
  const double force = -0.5 * rho * v * std::abs(v) * cd * area;
  return v + dt * force / mass;
}

HydroParams quiet_water() {
  HydroParams p;
  p.angular_damping.setZero();
  p.b_coef = 1.0;
  p.current.setZero();
  return p;
}

RateLoopGains no_actuation() {
  RateLoopGains g;
  g.kv_surge = 0.0;
  g.k_yaw = 0.0;
  g.k_pitch = 0.0;
  g.k_roll = 0.0;
  return g;
}

}  // namespace

TEST_CASE("drag force magnitude matches the quadratic law") {
  // v=(1,0,0), rho=1000, Cd=A=1 => 500 N opposing motion.
  HydroParams p = quiet_water();
  p.rho = 1000.0;
  p.drag_coeffs = Eigen::Vector3d::Ones();
  p.ref_areas = Eigen::Vector3d::Ones();
  p.mass = 1000.0;
  p.v_max = 100.0;
  RobotState s;
  s.linear_velocity = Eigen::Vector3d(1, 0, 0);
  const double dt = 1e-3;
  const RobotState next = step_dynamics(s, RateCommand{}, p, LegMixer{}, dt, no_actuation());
  const double dv = next.linear_velocity.x() - 1.0;
  CHECK(dv == doctest::Approx(-500.0 / p.mass * dt).epsilon(1e-12));
}

TEST_CASE("neutral buoyancy cancels gravity exactly") {
  HydroParams p = quiet_water();
  RobotState s;
  const RobotState next = step_dynamics(s, RateCommand{}, p, LegMixer{}, 0.04, no_actuation());
  CHECK(next.linear_velocity.norm() == 0.0);
  CHECK(next.position.norm() == 0.0);
  CHECK(next.angular_velocity.norm() == 0.0);
}

TEST_CASE("equilibrium state is a fixed point") {
  HydroParams p = quiet_water();
  RobotState s;
  s.position = Eigen::Vector3d(1, 2, 3);
  RobotState cur = s;
  for (int i = 0; i < 50; ++i) cur = step_dynamics(cur, RateCommand{}, p, LegMixer{}, 0.1, no_actuation());
  CHECK((cur.position - s.position).norm() == 0.0);
  CHECK(cur.linear_velocity.norm() == 0.0);
}

TEST_CASE("one drag step matches the scalar integration oracle") {
  HydroParams p = quiet_water();
  p.rho = 1000.0;
  p.drag_coeffs = Eigen::Vector3d::Ones();
  p.ref_areas = Eigen::Vector3d::Ones();
  p.mass = 10.0;
  p.v_max = 1e6;  // keep the clamp out of the oracle's way
  RobotState s;
  s.linear_velocity = Eigen::Vector3d(2, 0, 0);
  const double dt = 0.05;
  const double expected = scalar_drag_step(2.0, 1000.0, 1.0, 1.0, 10.0, dt);
  const RobotState next = step_dynamics(s, RateCommand{}, p, LegMixer{}, dt, no_actuation());
  CHECK(next.linear_velocity.x() == doctest::Approx(expected).epsilon(1e-12));
  // And the position integrates with the updated velocity.
  CHECK(next.position.x() == doctest::Approx(dt * expected).epsilon(1e-12));
}

TEST_CASE("buoyancy sign convention: b_coef below one sinks") {
  HydroParams p = quiet_water();
  p.b_coef = 0.9;
  p.drag_coeffs.setZero();
  RobotState s;
  const RobotState next = step_dynamics(s, RateCommand{}, p, LegMixer{}, 0.04, no_actuation());
  CHECK(next.linear_velocity.z() < 0.0);
  CHECK(next.linear_velocity.z() ==
        doctest::Approx(0.04 * p.g * (0.9 - 1.0)).epsilon(1e-12));

  p.b_coef = 1.2;
  const RobotState up = step_dynamics(s, RateCommand{}, p, LegMixer{}, 0.04, no_actuation());
  CHECK(up.linear_velocity.z() > 0.0);
}

TEST_CASE("rate loops: zero error gives zero torque, sign test") {
  RateLoopGains gains;
  RobotState s;
  s.angular_velocity = Eigen::Vector3d(0, 0, 0.3);
  RateCommand c;
  c.yaw_rate = 0.3;
  const GeneralizedForces u = apply_rate_command(c, s, gains);
  CHECK(u.yaw_torque == doctest::Approx(0.0));

  c.yaw_rate = 0.5;  // above the current rate
  CHECK(apply_rate_command(c, s, gains).yaw_torque > 0.0);
  c.yaw_rate = 0.1;
  CHECK(apply_rate_command(c, s, gains).yaw_torque < 0.0);
}

TEST_CASE("locked-axis yaw step response matches the first-order closed form") {
  // Small dt so discretization error stays well under the 2% budget.
  HydroParams p = quiet_water();
  p.drag_coeffs.setZero();
  p.angular_damping = Eigen::Vector3d(0, 0, 0.8);
  p.inertia_diag = Eigen::Vector3d(0.15, 0.45, 0.45);
  RateLoopGains gains;
  gains.kv_surge = 0.0;
  const double K = gains.k_yaw;      // 3.0
  const double d = 0.8;
  const double I = 0.45;
  const double w_cmd = 0.2;
  const double w_ss = K * w_cmd / (K + d);
  const double tau = I / (K + d);

  const double dt = 0.002;
  RobotState s;
  RateCommand c;
  c.yaw_rate = w_cmd;
  double t = 0.0;
  for (int i = 0; i < 400; ++i) {
    s = step_dynamics(s, c, p, LegMixer{}, dt, gains);
    t += dt;
    const double analytic = w_ss * (1.0 - std::exp(-t / tau));
    if (analytic > 0.02 * w_ss) {
      CHECK(s.angular_velocity.z() == doctest::Approx(analytic).epsilon(0.02));
    }
  }
  CHECK(s.angular_velocity.z() == doctest::Approx(w_ss).epsilon(0.02));
}

TEST_CASE("mixer: zero command allocates zero thrust, round trip is exact") {
  LegMixer mixer;
  const auto legs = mixer.allocate(GeneralizedForces{});
  CHECK(legs.norm() == 0.0);

  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    GeneralizedForces u{rng.uniform(-10, 10), rng.uniform(-1, 1), rng.uniform(-1, 1),
                        rng.uniform(-0.2, 0.2)};
    const auto w = mixer.net_wrench(mixer.allocate(u));
    CHECK(w.surge == doctest::Approx(u.surge).epsilon(1e-9));
    CHECK(w.yaw_torque == doctest::Approx(u.yaw_torque).epsilon(1e-9));
    CHECK(w.pitch_torque == doctest::Approx(u.pitch_torque).epsilon(1e-9));
    CHECK(w.roll_torque == doctest::Approx(u.roll_torque).epsilon(1e-9));
  }
}

TEST_CASE("mixer: dead leg stays at zero and contains perturbations") {
  LegMixer mixer;
  mixer.leg_health[kRearRight] = 0.0;
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    GeneralizedForces u{rng.uniform(-10, 10), rng.uniform(-1, 1), rng.uniform(-1, 1), 0.0};
    CHECK(mixer.allocate(u)[kRearRight] == 0.0);
  }

  // Perturbing how commands map onto the dead leg cannot change anything
  // downstream of the health mask.
  HydroParams p = quiet_water();
  LegMixer perturbed = mixer;
  perturbed.mixing_matrix.row(kRearRight) += Eigen::Matrix<double, 1, 4>(9, 9, 9, 9);
  RobotState a, b;
  RateCommand c;
  c.forward_speed = 0.6;
  c.yaw_rate = 0.2;
  for (int i = 0; i < 200; ++i) {
    a = step_dynamics(a, c, p, mixer, 0.04);
    b = step_dynamics(b, c, p, perturbed, 0.04);
  }
  CHECK((a.position - b.position).norm() == 0.0);
  CHECK((a.linear_velocity - b.linear_velocity).norm() == 0.0);
}

TEST_CASE("fault injection: dead rear-right leg biases yaw under surge") {
  HydroParams p = quiet_water();
  LegMixer mixer;
  mixer.leg_health[kRearRight] = 0.0;
  RobotState s;
  RateCommand c;
  c.forward_speed = 0.8;
  RateLoopGains gains;
  gains.k_yaw = 0.0;  // leave yaw uncontrolled to expose the coupling
  gains.k_pitch = 0.0;
  gains.k_roll = 0.0;
  for (int i = 0; i < 100; ++i) s = step_dynamics(s, c, p, mixer, 0.04, gains);
  // Losing a right-side leg removes a positive yaw-torque contribution.
  CHECK(s.angular_velocity.z() < -1e-4);
}

TEST_CASE("energy sanity: speed is non-increasing without thrust") {
  HydroParams p;  // defaults: realistic drag and damping
  p.b_coef = 1.0;
  p.current.setZero();
  RobotState s;
  s.linear_velocity = Eigen::Vector3d(1.2, -0.4, 0.3);
  s.angular_velocity = Eigen::Vector3d(0.2, -0.3, 0.5);
  double speed = s.linear_velocity.norm();
  for (int i = 0; i < 500; ++i) {
    s = step_dynamics(s, RateCommand{}, p, LegMixer{}, 0.04, no_actuation());
    const double next_speed = s.linear_velocity.norm();
    CHECK(next_speed < speed + 1e-15);
    speed = next_speed;
  }
  CHECK(speed < 0.5);
}

TEST_CASE("frame consistency: identity orientation matches per-axis world evaluation") {
  HydroParams p = quiet_water();
  p.drag_coeffs = Eigen::Vector3d(0.9, 1.1, 1.3);
  p.ref_areas = Eigen::Vector3d(0.03, 0.09, 0.12);
  p.mass = 12.0;
  RobotState s;
  s.linear_velocity = Eigen::Vector3d(0.8, -0.5, 0.3);
  const double dt = 0.01;
  const RobotState next = step_dynamics(s, RateCommand{}, p, LegMixer{}, dt, no_actuation());
  for (int i = 0; i < 3; ++i) {
    const double expected = scalar_drag_step(s.linear_velocity[i], p.rho, p.drag_coeffs[i],
                                             p.ref_areas[i], p.mass, dt);
    CHECK(next.linear_velocity[i] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("drag acts relative to the ambient current") {
  HydroParams p = quiet_water();
  p.current = Eigen::Vector3d(0.3, 0, 0);
  RobotState s;
  s.linear_velocity = Eigen::Vector3d(0.3, 0, 0);  // drifting with the flow
  const RobotState next = step_dynamics(s, RateCommand{}, p, LegMixer{}, 0.04, no_actuation());
  CHECK(next.linear_velocity.x() == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("orientation stays unit under long integration") {
  HydroParams p = quiet_water();
  RobotState s;
  RateCommand c;
  c.yaw_rate = 0.4;
  c.pitch_rate = -0.2;
  for (int i = 0; i < 2000; ++i) s = step_dynamics(s, c, p, LegMixer{}, 0.04);
  CHECK(std::abs(s.orientation.norm() - 1.0) < 1e-9);
}

TEST_CASE("step_dynamics rejects bad dt and validates params") {
  RobotState s;
  CHECK_THROWS_AS(step_dynamics(s, RateCommand{}, HydroParams{}, LegMixer{}, 0.0),
                  std::invalid_argument);
  HydroParams bad;
  bad.mass = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = HydroParams{};
  bad.rho = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("target advances at its regime velocity") {
  TargetMotionParams params;
  params.dt = 0.1;
  TargetState t;
  t.position.setZero();
  t.velocity = Eigen::Vector3d(0.3, 0, 0);
  t.regime_timer = 5;
  Rng rng(1);
  const TargetState next = step_target(t, params, rng);
  CHECK(next.position.x() == doctest::Approx(0.03).epsilon(1e-12));
  CHECK(next.regime_timer == 4);
  CHECK(next.velocity == t.velocity);
}

TEST_CASE("target trajectories are deterministic under a seed") {
  TargetMotionParams params;
  TargetState a, b;
  Rng ra(42), rb(42);
  for (int i = 0; i < 2000; ++i) {
    a = step_target(a, params, ra);
    b = step_target(b, params, rb);
    CHECK(a.position == b.position);
    CHECK(a.regime_timer == b.regime_timer);
  }
}

TEST_CASE("target per-axis mean absolute speed matches the uniform law") {
  TargetMotionParams params;
  params.speed_box = Eigen::Vector3d(0.4, 0.4, 0.4);
  params.regime_min_steps = 5;
  params.regime_max_steps = 15;  // many regimes keep the Monte-Carlo error small
  TargetState t;
  Rng rng(7);
  Eigen::Vector3d sum_abs = Eigen::Vector3d::Zero();
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    t = step_target(t, params, rng);
    sum_abs += t.velocity.cwiseAbs();
    sum += t.velocity;
  }
  for (int i = 0; i < 3; ++i) {
    CHECK(sum_abs[i] / n == doctest::Approx(0.2).epsilon(0.01));  // E|U(-a,a)| = a/2
    CHECK(std::abs(sum[i] / n) < 0.01);
  }
  CHECK(t.velocity.cwiseAbs().maxCoeff() <= 0.4);
}

TEST_CASE("delay line: zero delay is the identity") {
  DelayLine line(0);
  RateCommand c;
  c.yaw_rate = 0.25;
  line.push(c, 0);
  CHECK(line.pop(0).yaw_rate == 0.25);
}

TEST_CASE("delay line: command pushed at t arrives at t plus delay") {
  DelayLine line(3);
  RateCommand c;
  c.yaw_rate = 0.7;
  for (int t = 0; t < 10; ++t) {
    line.push(RateCommand{}, t);
    line.pop(t);
  }
  line.push(c, 10);
  CHECK(line.pop(10).yaw_rate == 0.0);
  for (int t = 11; t < 13; ++t) {
    line.push(RateCommand{}, t);
    CHECK(line.pop(t).yaw_rate == 0.0);
  }
  line.push(RateCommand{}, 13);
  CHECK(line.pop(13).yaw_rate == 0.7);
}

TEST_CASE("delay line matches a shift-register oracle on random sequences") {
  for (int delay : {0, 1, 2, 5, 9}) {
    DelayLine line(delay);
    Rng rng(std::uint64_t(100 + delay));
    std::vector<RateCommand> history;
    for (int t = 0; t < 500; ++t) {
      RateCommand c;
      c.yaw_rate = rng.uniform(-1, 1);
      c.pitch_rate = rng.uniform(-1, 1);
      c.forward_speed = rng.uniform(0, 1);
      history.push_back(c);
      line.push(c, t);
      CHECK(line.pending() <= std::size_t(delay) + 1);
      const RateCommand out = line.pop(t);
      if (t >= delay) {
        CHECK(out == history[std::size_t(t - delay)]);
      } else {
        CHECK(out == RateCommand{});
      }
    }
  }
}

TEST_CASE("delay line rejects non-monotonic time") {
  DelayLine line(2);
  line.push(RateCommand{}, 5);
  CHECK_THROWS_AS(line.push(RateCommand{}, 5), std::invalid_argument);
  CHECK_THROWS_AS(line.push(RateCommand{}, 4), std::invalid_argument);
  line.pop(5);
  CHECK_THROWS_AS(line.pop(5), std::invalid_argument);
}

TEST_CASE("open-loop response with delay D is the D-shifted zero-delay response") {
  HydroParams p = quiet_water();
  const int D = 7;
  const int N = 120;

  const auto run = [&](int delay) {
    std::vector<Eigen::Vector3d> positions;
    std::vector<Eigen::Vector3d> rates;
    RobotState s;  // equilibrium start
    DelayLine line(delay);
    Rng rng(17);
    for (int t = 0; t < N; ++t) {
      RateCommand c;
      c.forward_speed = 0.5 + 0.3 * std::sin(0.1 * t);
      c.yaw_rate = rng.uniform(-0.3, 0.3);
      line.push(c, t);
      s = step_dynamics(s, line.pop(t), p, LegMixer{}, 0.04);
      positions.push_back(s.position);
      rates.push_back(s.angular_velocity);
    }
    return std::make_pair(positions, rates);
  };

  const auto [pos0, rate0] = run(0);
  const auto [posD, rateD] = run(D);
  for (int t = 0; t + D < N; ++t) {
    CHECK((posD[std::size_t(t + D)] - pos0[std::size_t(t)]).norm() == 0.0);
    CHECK((rateD[std::size_t(t + D)] - rate0[std::size_t(t)]).norm() == 0.0);
  }
}
