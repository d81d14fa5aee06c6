#pragma once

#include <cstdint>

#include "swimtrack/agent.hpp"
#include "swimtrack/rng.hpp"
#include "swimtrack/sim.hpp"

namespace swimtrack::curriculum {

enum class Stage { PidExplore, SharedControl, RlOnly };

const char* stage_name(Stage s);

struct CurriculumStage {
  Stage stage = Stage::PidExplore;
  double outer_region_fraction = 0.20;
  double random_action_prob = 0.30;
};

struct CurriculumConfig {
  std::size_t min_prefill = 2000;      // experiences before shared control starts
  std::int64_t decay_steps = 100000;   // linear outer-region decay budget
  double initial_fraction = 0.20;
  double random_action_prob = 0.30;
};

// Stage machine: PID exploration until the replay holds min_prefill
// experiences, then shared control with a linearly shrinking outer region,
// then RL alone. Never regresses.
class CurriculumSchedule {
 public:
  explicit CurriculumSchedule(const CurriculumConfig& cfg) : cfg_(cfg) {}

  CurriculumStage advance(std::size_t replay_size);
  CurriculumStage current() const { return current_; }

 private:
  CurriculumConfig cfg_;
  CurriculumStage current_{Stage::PidExplore, 0.20, 0.30};
  std::int64_t shared_steps_ = 0;
  bool started_ = false;
};

enum class CommandSource { Rl, Pid, Random, Spiral };

const char* command_source_name(CommandSource s);

struct ArbiterDecision {
  sim::RateCommand command;
  CommandSource source = CommandSource::Rl;
  int yaw_idx = 0;
  int pitch_idx = 0;
};

// Shared-control shield: inside the safe interior the RL command passes
// through; in the outer band the PID command is used (quantized onto the
// action grid so the transition stays expressible), randomly replaced by a
// uniform grid action with the configured probability.
ArbiterDecision shared_control_arbiter(double x_c, double y_c, const CurriculumStage& stage,
                                       const agent::ActionChoice& rl_cmd,
                                       const sim::RateCommand& pid_cmd,
                                       const agent::ActionGrid& grid, Rng& rng);

struct SpiralParams {
  double r0 = 0.05;          // rad, initial offset radius
  double radius_gain = 5.5e-3;  // radius growth per radian of sweep
  double dtheta = 0.2;       // rad of sweep per step
  double k_rate = 2.5;       // rad/s of commanded rate per rad of offset
  double v_search = 0.15;    // m/s forward speed while searching
  double max_radius = 0.9;   // rad, offset cap
};

struct RecoveryState {
  double bearing_yaw = 0.0;    // rad, offset of the last filtered position
  double bearing_pitch = 0.0;
  double spiral_angle = 0.0;   // rad swept so far
  std::int64_t steps = 0;
};

// Initializes a recovery from the last filtered image position (normalized
// coords) given the camera FOV.
RecoveryState start_recovery(double x_c, double y_c, double hfov, double vfov);

// Archimedean spiral across (yaw, pitch) offset space starting at the last
// bearing; offsets are mapped proportionally onto rate commands.
sim::RateCommand spiral_search_step(RecoveryState& rec, const SpiralParams& params);
// Offset the spiral aims at for a given recovery state (exposed for the
// coverage checks).
void spiral_offset(const RecoveryState& rec, const SpiralParams& params, double& yaw_off,
                   double& pitch_off);

// Stage-1 exploration setpoints: image-plane targets resampled every
// 100-300 steps.
class SetpointExplorer {
 public:
  SetpointExplorer(double box, int min_steps = 100, int max_steps = 300)
      : box_(box), min_steps_(min_steps), max_steps_(max_steps) {}

  void step(Rng& rng);
  double x_set() const { return x_set_; }
  double y_set() const { return y_set_; }

 private:
  double box_;
  int min_steps_;
  int max_steps_;
  double x_set_ = 0.0;
  double y_set_ = 0.0;
  int remaining_ = 0;
};

}  // namespace swimtrack::curriculum
