#include "swimtrack/pid.hpp"

#include <algorithm>
#include <stdexcept>

namespace swimtrack::control {

std::pair<double, PidState> pid_step(const PidGains& gains, const PidState& state, double error,
                                     double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("pid_step: dt must be > 0");

  PidState next = state;
  next.integral = std::clamp(state.integral + error * dt, -gains.integral_limit, gains.integral_limit);
  const double derivative = state.initialized ? (error - state.prev_error) / dt : 0.0;
  next.prev_error = error;
  next.initialized = true;

  const double raw = gains.kp * error + gains.ki * next.integral + gains.kd * derivative;
  const double command = std::clamp(raw, -gains.output_limit, gains.output_limit);
  return {command, next};
}

TuneResult tune_gains(const std::vector<PidGains>& candidates,
                      const std::function<double(const PidGains&)>& evaluate) {
  if (candidates.empty()) throw std::invalid_argument("tune_gains: empty candidate list");
  TuneResult result;
  result.scores.reserve(candidates.size());
  std::size_t best_idx = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    result.scores.push_back(evaluate(candidates[i]));
    if (result.scores[i] > result.scores[best_idx]) best_idx = i;
  }
  result.best = candidates[best_idx];
  return result;
}

std::vector<PidGains> gain_grid(const std::vector<double>& kps, const std::vector<double>& kis,
                                const std::vector<double>& kds, double integral_limit,
                                double output_limit) {
  std::vector<PidGains> grid;
  grid.reserve(kps.size() * kis.size() * kds.size());
  for (double kp : kps)
    for (double ki : kis)
      for (double kd : kds)
        grid.push_back(PidGains{kp, ki, kd, integral_limit, output_limit});
  return grid;
}

sim::RateCommand PidTrackingController::update(const tracker::TrackState& track, bool lost) {
  if (lost) throw std::invalid_argument("PidTrackingController: track is LOST");
  sim::RateCommand cmd = update_with_setpoint(track.x[0], track.x[1], 0.0, 0.0);
  cmd.forward_speed = update_forward(track.x[2]);
  return cmd;
}

sim::RateCommand PidTrackingController::update_with_setpoint(double x_c, double y_c, double x_set,
                                                             double y_set) {
  sim::RateCommand cmd;
  // Positive yaw/pitch rates move the target toward larger image
  // coordinates, so the loops track setpoint-minus-measurement.
  auto [yaw, ys] = pid_step(yaw_gains_, yaw_state_, x_set - x_c, dt_);
  auto [pitch, ps] = pid_step(pitch_gains_, pitch_state_, y_set - y_c, dt_);
  yaw_state_ = ys;
  pitch_state_ = ps;
  cmd.yaw_rate = yaw;
  cmd.pitch_rate = pitch;
  return cmd;
}

double PidTrackingController::update_forward(double area) {
  auto [v, fs] = pid_step(forward_gains_, forward_state_, area_ref_ - area, dt_);
  forward_state_ = fs;
  return v;
}

void PidTrackingController::reset() {
  yaw_state_ = PidState{};
  pitch_state_ = PidState{};
  forward_state_ = PidState{};
}

}  // namespace swimtrack::control
