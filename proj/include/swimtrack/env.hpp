#pragma once

#include <cstdint>
#include <optional>

#include "swimtrack/curriculum.hpp"
#include "swimtrack/pid.hpp"
#include "swimtrack/sim.hpp"
#include "swimtrack/tracker.hpp"
#include "swimtrack/vision.hpp"

namespace swimtrack::harness {

// Everything that defines one physical scenario. Assembled from the flat
// config by presets.cpp; trials copy it by value so parallel runs share
// nothing.
struct ScenarioParams {
  double dt = 0.04;

  sim::HydroParams hydro;
  sim::RateLoopGains loops;
  sim::LegMixer mixer;
  sim::TargetMotionParams target_motion;

  vision::CameraModel camera;
  vision::ConfidenceField field;
  vision::VisionNoise vnoise;
  vision::TargetShape target_shape;

  double kf_q_pos = 1e-4;
  double kf_q_vel = 1e-2;
  tracker::TrackerConfig tracker_cfg;

  control::PidGains yaw_gains{0.8, 0.1, 0.05, 0.5, 0.6};
  control::PidGains pitch_gains{0.8, 0.1, 0.05, 0.5, 0.6};
  control::PidGains forward_gains{20.0, 2.0, 0.0, 0.05, 1.2};
  double area_ref = 0.05;

  double mu = 0.1;
  double lambda = 0.1;

  agent::FeatureScaling scaling;
  int k_yaw = 7;
  int k_pitch = 7;
  double yaw_rate_max = 0.5;
  double pitch_rate_max = 0.5;
  std::vector<int> hidden = {128, 128};
  dqn::TrainerParams trainer;
  std::size_t replay_capacity = 2000;

  curriculum::CurriculumConfig curriculum_cfg;
  curriculum::SpiralParams spiral;
  int spiral_budget = 1000;  // LOST steps before the trial ends

  double initial_range = 3.0;  // m, target straight ahead at start

  tracker::KfModel make_kf_model() const;
  agent::ActionGrid make_grid() const;
};

// One tracker observation cycle's result, as seen by the controllers.
struct SenseResult {
  double x_f = 0.0;     // filtered x_c
  double y_f = 0.0;
  double area_f = 0.0;
  double conf_f = 0.0;
  bool detected = false;  // raw detection this frame
  bool has_track = false;
  bool lost = false;      // tracker in LOST state
};

// Closed-loop plant: dynamics + target + synthetic vision + tracker +
// actuation delay. Controllers call sense() then apply() exactly once per
// step.
class TrackingEnv {
 public:
  TrackingEnv(const ScenarioParams& params, int delay_steps, std::uint64_t seed);

  SenseResult sense();
  void apply(const sim::RateCommand& command);

  std::int64_t step_index() const { return t_; }
  const sim::RobotState& robot() const { return robot_; }
  const sim::TargetState& target() const { return target_; }
  const sim::DelayLine& delay_line() const { return delay_; }
  const tracker::SingleTargetTracker& tracker() const { return tracker_; }

 private:
  ScenarioParams params_;
  tracker::KfModel kf_model_;
  sim::RobotState robot_;
  sim::TargetState target_;
  sim::DelayLine delay_;
  tracker::SingleTargetTracker tracker_;
  Rng vision_rng_;
  Rng target_rng_;
  std::int64_t t_ = 0;
  bool sensed_ = false;
  SenseResult last_sense_;
};

}  // namespace swimtrack::harness
