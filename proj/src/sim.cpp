#include "swimtrack/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace swimtrack::sim {

namespace {

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

bool finite(const Eigen::Vector3d& v) { return v.allFinite(); }

}  // namespace

void HydroParams::validate() const {
  if (!(rho > 0.0)) throw std::invalid_argument("hydro: rho must be > 0");
  if (!(mass > 0.0)) throw std::invalid_argument("hydro: mass must be > 0");
  if (!(g > 0.0)) throw std::invalid_argument("hydro: g must be > 0");
  if ((drag_coeffs.array() < 0.0).any()) throw std::invalid_argument("hydro: drag_coeffs must be >= 0");
  if ((ref_areas.array() < 0.0).any()) throw std::invalid_argument("hydro: ref_areas must be >= 0");
  if ((inertia_diag.array() <= 0.0).any()) throw std::invalid_argument("hydro: inertia must be > 0");
}

LegMixer::LegMixer() {
  // Per-leg contribution patterns (legs ordered FL, FR, ML, MR, RL, RR):
  //   surge: every leg pushes forward.
  //   yaw:   left/right differential, moment arm d_y.
  //   pitch: fore/aft differential via vectored stroke, arm d_p.
  //   roll:  diagonal pair twist, arm d_r.
  // The four patterns are mutually orthogonal, so the pseudo-inverse
  // allocation is just the scaled transpose.
  const double d_y = 0.2, d_p = 0.15, d_r = 0.05;
  effectiveness << 1, 1, 1, 1, 1, 1,
      -d_y, d_y, -d_y, d_y, -d_y, d_y,
      -d_p, -d_p, 0, 0, d_p, d_p,
      d_r, -d_r, 0, 0, -d_r, d_r;
  for (int r = 0; r < 4; ++r) {
    const double n2 = effectiveness.row(r).squaredNorm();
    mixing_matrix.col(r) = effectiveness.row(r).transpose() / n2;
  }
}

Eigen::Matrix<double, 6, 1> LegMixer::allocate(const GeneralizedForces& u) const {
  const Eigen::Vector4d cmd(u.surge, u.yaw_torque, u.pitch_torque, u.roll_torque);
  Eigen::Matrix<double, 6, 1> legs = mixing_matrix * cmd;
  for (int i = 0; i < 6; ++i) {
    legs[i] = clamp(legs[i], -max_leg_thrust, max_leg_thrust) * leg_health[i];
  }
  return legs;
}

GeneralizedForces LegMixer::net_wrench(const Eigen::Matrix<double, 6, 1>& legs) const {
  const Eigen::Vector4d w = effectiveness * legs;
  return GeneralizedForces{w[0], w[1], w[2], w[3]};
}

GeneralizedForces apply_rate_command(const RateCommand& command, const RobotState& state,
                                     const RateLoopGains& gains) {
  RateCommand c = command;
  if (!std::isfinite(c.forward_speed)) c.forward_speed = 0.0;
  if (!std::isfinite(c.yaw_rate)) c.yaw_rate = 0.0;
  if (!std::isfinite(c.pitch_rate)) c.pitch_rate = 0.0;
  c.forward_speed = clamp(c.forward_speed, gains.min_speed_cmd, gains.max_speed_cmd);
  c.yaw_rate = clamp(c.yaw_rate, -gains.max_rate_cmd, gains.max_rate_cmd);
  c.pitch_rate = clamp(c.pitch_rate, -gains.max_rate_cmd, gains.max_rate_cmd);

  GeneralizedForces u;
  u.surge = clamp(gains.kv_surge * (c.forward_speed - state.linear_velocity.x()),
                  -gains.max_surge_force, gains.max_surge_force);
  u.yaw_torque = clamp(gains.k_yaw * (c.yaw_rate - state.angular_velocity.z()),
                       -gains.max_torque, gains.max_torque);
  u.pitch_torque = clamp(gains.k_pitch * (c.pitch_rate - state.angular_velocity.y()),
                         -gains.max_torque, gains.max_torque);
  u.roll_torque = clamp(gains.k_roll * (0.0 - state.angular_velocity.x()),
                        -gains.max_torque, gains.max_torque);
  return u;
}

RobotState step_dynamics(const RobotState& state, const RateCommand& command,
                         const HydroParams& params, const LegMixer& mixer, double dt,
                         const RateLoopGains& gains) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_dynamics: dt must be > 0");

  const GeneralizedForces demand = apply_rate_command(command, state, gains);
  const Eigen::Matrix<double, 6, 1> legs = mixer.allocate(demand);
  const GeneralizedForces u = mixer.net_wrench(legs);

  const Eigen::Matrix3d R = state.orientation.toRotationMatrix();  // body -> world

  // Drag per body axis, relative to the ambient current: F_i = -1/2 rho v|v| Cd_i A_i.
  const Eigen::Vector3d v_rel = state.linear_velocity - R.transpose() * params.current;
  Eigen::Vector3d drag;
  for (int i = 0; i < 3; ++i) {
    drag[i] = -0.5 * params.rho * v_rel[i] * std::abs(v_rel[i]) * params.drag_coeffs[i] *
              params.ref_areas[i];
  }

  // Net vertical force: buoyancy minus weight, world z. b_coef = 1 cancels exactly.
  const Eigen::Vector3d f_vertical_world(0, 0, params.mass * params.g * (params.b_coef - 1.0));

  Eigen::Vector3d force_body = drag;
  force_body.x() += u.surge;
  force_body += R.transpose() * f_vertical_world;

  Eigen::Vector3d torque_body(u.roll_torque, u.pitch_torque, u.yaw_torque);
  torque_body -= params.angular_damping.cwiseProduct(state.angular_velocity);

  RobotState next = state;
  next.leg_thrusts = legs;
  next.linear_velocity += dt * force_body / params.mass;
  next.angular_velocity += dt * torque_body.cwiseQuotient(params.inertia_diag);

  const double speed = next.linear_velocity.norm();
  if (speed > params.v_max) next.linear_velocity *= params.v_max / speed;

  // Pose integrated with the updated velocities (semi-implicit Euler).
  next.position += dt * (R * next.linear_velocity);
  const Eigen::Vector3d dtheta = next.angular_velocity * dt;
  const double angle = dtheta.norm();
  Eigen::Quaterniond dq = Eigen::Quaterniond::Identity();
  if (angle > 1e-12) {
    dq = Eigen::Quaterniond(Eigen::AngleAxisd(angle, dtheta / angle));
  }
  next.orientation = (state.orientation * dq).normalized();

  if (!finite(next.position) || !finite(next.linear_velocity) || !finite(next.angular_velocity) ||
      !next.orientation.coeffs().allFinite()) {
    throw std::runtime_error("step_dynamics: non-finite state after step");
  }
  return next;
}

TargetState step_target(const TargetState& target, const TargetMotionParams& params, Rng& rng) {
  TargetState next = target;
  if (next.regime_timer <= 0) {
    for (int i = 0; i < 3; ++i) {
      next.velocity[i] = rng.uniform(-params.speed_box[i], params.speed_box[i]);
    }
    next.regime_timer =
        params.regime_min_steps + rng.uniform_int(params.regime_max_steps - params.regime_min_steps + 1);
  }
  next.position += next.velocity * params.dt;
  next.regime_timer -= 1;
  return next;
}

DelayLine::DelayLine(int delay_steps, RateCommand neutral)
    : delay_steps_(delay_steps), neutral_(neutral) {
  if (delay_steps < 0) throw std::invalid_argument("DelayLine: delay_steps must be >= 0");
}

void DelayLine::push(const RateCommand& command, std::int64_t t) {
  if (t <= last_push_) throw std::invalid_argument("DelayLine::push: t must increase monotonically");
  last_push_ = t;
  queue_.push_back(Entry{t, command});
}

RateCommand DelayLine::pop(std::int64_t t) {
  if (t <= last_pop_ && last_pop_ >= 0) {
    throw std::invalid_argument("DelayLine::pop: t must increase monotonically");
  }
  last_pop_ = t;
  RateCommand out = neutral_;
  bool found = false;
  while (!queue_.empty() && queue_.front().pushed_at + delay_steps_ <= t) {
    out = queue_.front().command;
    found = true;
    queue_.pop_front();
  }
  return found ? out : neutral_;
}

std::vector<RateCommand> DelayLine::in_flight() const {
  std::vector<RateCommand> out;
  out.reserve(queue_.size());
  for (const auto& e : queue_) out.push_back(e.command);
  return out;
}

}  // namespace swimtrack::sim
