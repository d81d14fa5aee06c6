#include "swimtrack/env.hpp"

#include <algorithm>
#include <stdexcept>

namespace swimtrack::harness {

namespace {

enum Stream : std::uint64_t { kVision = 11, kTarget = 12 };

}  // namespace

tracker::KfModel ScenarioParams::make_kf_model() const {
  tracker::MeasVec r;
  const double cs = std::max(vnoise.center_sigma, 1e-3);
  const double as = std::max(vnoise.area_rel_sigma * area_ref, 1e-4);
  const double fs = std::max(field.noise_sigma, 1e-2);
  r << cs * cs, cs * cs, as * as, 1e-3, fs * fs;
  return tracker::KfModel::make(dt, kf_q_pos, kf_q_vel, r);
}

agent::ActionGrid ScenarioParams::make_grid() const {
  return agent::ActionGrid::symmetric(k_yaw, yaw_rate_max, k_pitch, pitch_rate_max);
}

TrackingEnv::TrackingEnv(const ScenarioParams& params, int delay_steps, std::uint64_t seed)
    : params_(params),
      kf_model_(params.make_kf_model()),
      delay_(delay_steps),
      tracker_(kf_model_, params.tracker_cfg),
      vision_rng_(derive_seed(seed, kVision)),
      target_rng_(derive_seed(seed, kTarget)) {
  params_.hydro.validate();
  target_.position = Eigen::Vector3d(params_.initial_range, 0.0, 0.0);
  target_.velocity.setZero();
  target_.regime_timer = 0;  // resamples on the first step
}

SenseResult TrackingEnv::sense() {
  if (sensed_) throw std::logic_error("TrackingEnv::sense called twice without apply");
  sensed_ = true;

  const auto obs = vision::observe(robot_, target_, params_.camera, params_.field, params_.vnoise,
                                   params_.target_shape, vision_rng_);
  const auto& track = tracker_.step(obs);

  SenseResult r;
  r.detected = obs.detected;
  r.has_track = tracker_.has_track();
  r.lost = !tracker_.has_track() || tracker_.lost();
  if (tracker_.has_track()) {
    r.x_f = track.x[0];
    r.y_f = track.x[1];
    r.area_f = track.x[2];
    r.conf_f = std::clamp(track.x[4], 0.0, 1.0);
  } else {
    // No track yet (trial start): neutral placeholder.
    r.area_f = params_.area_ref;
  }
  last_sense_ = r;
  return r;
}

void TrackingEnv::apply(const sim::RateCommand& command) {
  if (!sensed_) throw std::logic_error("TrackingEnv::apply called before sense");
  sensed_ = false;

  delay_.push(command, t_);
  const sim::RateCommand released = delay_.pop(t_);
  robot_ = sim::step_dynamics(robot_, released, params_.hydro, params_.mixer, params_.dt,
                              params_.loops);
  target_ = sim::step_target(target_, params_.target_motion, target_rng_);
  ++t_;
}

}  // namespace swimtrack::harness
