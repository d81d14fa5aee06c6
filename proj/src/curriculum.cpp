#include "swimtrack/curriculum.hpp"

#include <algorithm>
#include <cmath>

namespace swimtrack::curriculum {

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::PidExplore: return "PID_EXPLORE";
    case Stage::SharedControl: return "SHARED_CONTROL";
    case Stage::RlOnly: return "RL_ONLY";
  }
  return "?";
}

const char* command_source_name(CommandSource s) {
  switch (s) {
    case CommandSource::Rl: return "RL";
    case CommandSource::Pid: return "PID";
    case CommandSource::Random: return "RAND";
    case CommandSource::Spiral: return "SPIRAL";
  }
  return "?";
}

CurriculumStage CurriculumSchedule::advance(std::size_t replay_size) {
  if (!started_) {
    current_ = CurriculumStage{Stage::PidExplore, cfg_.initial_fraction, cfg_.random_action_prob};
    started_ = true;
  }
  switch (current_.stage) {
    case Stage::PidExplore:
      if (replay_size >= cfg_.min_prefill) {
        current_.stage = Stage::SharedControl;
        current_.outer_region_fraction = cfg_.initial_fraction;
        shared_steps_ = 0;
      }
      break;
    case Stage::SharedControl: {
      ++shared_steps_;
      const double t = std::min(1.0, double(shared_steps_) / double(cfg_.decay_steps));
      current_.outer_region_fraction = cfg_.initial_fraction * (1.0 - t);
      if (shared_steps_ >= cfg_.decay_steps) {
        current_.stage = Stage::RlOnly;
        current_.outer_region_fraction = 0.0;
      }
      break;
    }
    case Stage::RlOnly:
      current_.outer_region_fraction = 0.0;
      break;
  }
  return current_;
}

ArbiterDecision shared_control_arbiter(double x_c, double y_c, const CurriculumStage& stage,
                                       const agent::ActionChoice& rl_cmd,
                                       const sim::RateCommand& pid_cmd,
                                       const agent::ActionGrid& grid, Rng& rng) {
  ArbiterDecision d;
  const double border = 1.0 - stage.outer_region_fraction;
  const bool outer = std::max(std::abs(x_c), std::abs(y_c)) > border;
  if (!outer) {
    d.command = rl_cmd.command;
    d.source = CommandSource::Rl;
    d.yaw_idx = rl_cmd.yaw_idx;
    d.pitch_idx = rl_cmd.pitch_idx;
    return d;
  }
  if (rng.bernoulli(stage.random_action_prob)) {
    d.source = CommandSource::Random;
    d.yaw_idx = rng.uniform_int(int(grid.yaw_levels.size()));
    d.pitch_idx = rng.uniform_int(int(grid.pitch_levels.size()));
  } else {
    d.source = CommandSource::Pid;
    d.yaw_idx = grid.nearest_yaw(pid_cmd.yaw_rate);
    d.pitch_idx = grid.nearest_pitch(pid_cmd.pitch_rate);
  }
  d.command.yaw_rate = grid.yaw_levels[d.yaw_idx];
  d.command.pitch_rate = grid.pitch_levels[d.pitch_idx];
  d.command.forward_speed = pid_cmd.forward_speed;
  return d;
}

RecoveryState start_recovery(double x_c, double y_c, double hfov, double vfov) {
  RecoveryState rec;
  // Rotation offsets that would re-point the camera at the last filtered
  // position: a target right of center (x_c > 0) needs a clockwise
  // (negative) yaw rotation, and one above center a negative pitch rate.
  rec.bearing_yaw = -x_c * 0.5 * hfov;
  rec.bearing_pitch = -y_c * 0.5 * vfov;
  if (std::abs(rec.bearing_yaw) < 1e-9 && std::abs(rec.bearing_pitch) < 1e-9) {
    rec.bearing_yaw = 1e-3;  // degenerate center loss; pick a direction
  }
  return rec;
}

void spiral_offset(const RecoveryState& rec, const SpiralParams& params, double& yaw_off,
                   double& pitch_off) {
  const double phi0 = std::atan2(rec.bearing_pitch, rec.bearing_yaw);
  const double radius = std::min(params.max_radius, params.r0 + params.radius_gain * rec.spiral_angle);
  yaw_off = radius * std::cos(phi0 + rec.spiral_angle);
  pitch_off = radius * std::sin(phi0 + rec.spiral_angle);
}

sim::RateCommand spiral_search_step(RecoveryState& rec, const SpiralParams& params) {
  double yaw_off = 0.0, pitch_off = 0.0;
  spiral_offset(rec, params, yaw_off, pitch_off);
  rec.spiral_angle += params.dtheta;
  rec.steps += 1;

  sim::RateCommand cmd;
  cmd.yaw_rate = params.k_rate * yaw_off;
  cmd.pitch_rate = params.k_rate * pitch_off;
  cmd.forward_speed = params.v_search;
  return cmd;
}

void SetpointExplorer::step(Rng& rng) {
  if (remaining_ <= 0) {
    x_set_ = rng.uniform(-box_, box_);
    y_set_ = rng.uniform(-box_, box_);
    remaining_ = min_steps_ + rng.uniform_int(max_steps_ - min_steps_ + 1);
  }
  --remaining_;
}

}  // namespace swimtrack::curriculum
