#pragma once

#include <deque>
#include <cstdint>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "swimtrack/rng.hpp"

namespace swimtrack::sim {

// Conventions used throughout:
//   world frame: z up.
//   body frame:  x forward (camera axis), y left, z up.
//   yaw_rate  commands body angular velocity about z (positive = turn left).
//   pitch_rate commands body angular velocity about y (positive tilts the
//   camera axis downward, which moves a fixed target upward in the image).

struct RateCommand {
  double forward_speed = 0.0;  // m/s, surge setpoint
  double yaw_rate = 0.0;       // rad/s
  double pitch_rate = 0.0;     // rad/s

  bool operator==(const RateCommand&) const = default;
};

struct RobotState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();           // world, m
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();  // body->world
  Eigen::Vector3d linear_velocity = Eigen::Vector3d::Zero();    // body, m/s
  Eigen::Vector3d angular_velocity = Eigen::Vector3d::Zero();   // body, rad/s
  Eigen::Matrix<double, 6, 1> leg_thrusts = Eigen::Matrix<double, 6, 1>::Zero();  // N
};

struct HydroParams {
  double rho = 1000.0;                                   // kg/m^3
  Eigen::Vector3d drag_coeffs{0.9, 1.1, 1.1};            // C_d per body axis
  Eigen::Vector3d ref_areas{0.03, 0.09, 0.09};           // m^2 per body axis
  double mass = 12.0;                                    // kg
  double g = 9.81;                                       // m/s^2
  double b_coef = 1.0;                                   // 1 => neutral buoyancy
  Eigen::Vector3d angular_damping{0.3, 0.8, 0.8};        // N*m*s/rad
  Eigen::Vector3d current = Eigen::Vector3d::Zero();     // world-frame flow, m/s
  // Rotational inertia is needed to integrate torques; the parameter set
  // above has no equivalent, so it lives here alongside mass.
  Eigen::Vector3d inertia_diag{0.15, 0.45, 0.45};        // kg*m^2
  double v_max = 1.8;                                    // speed clamp, m/s

  void validate() const;
};

// Inner-loop gains converting commanded rates into generalized forces, plus
// the actuation limits they are clamped to.
struct RateLoopGains {
  double kv_surge = 30.0;     // N per (m/s) of surge error
  double k_yaw = 3.0;         // N*m per (rad/s) of yaw-rate error
  double k_pitch = 3.0;       // N*m per (rad/s)
  double k_roll = 1.5;        // N*m per (rad/s), regulates roll rate to zero
  double max_surge_force = 25.0;   // N
  double max_torque = 4.0;         // N*m, per axis
  double max_rate_cmd = 1.0;       // rad/s, commanded rates clamp
  double max_speed_cmd = 1.2;      // m/s
  double min_speed_cmd = -0.2;     // m/s (small reverse allowed)
};

// Generalized force demand: surge force plus body torques.
struct GeneralizedForces {
  double surge = 0.0;        // N, body x
  double yaw_torque = 0.0;   // N*m, body z
  double pitch_torque = 0.0; // N*m, body y
  double roll_torque = 0.0;  // N*m, body x
};

// Six-leg thrust allocator. The allocation matrix distributes the four
// generalized commands over six per-leg effort scalars; the effectiveness
// matrix maps (health-masked) leg efforts back to the net wrench applied to
// the body. Rows are constructed orthogonal so that with all legs healthy
// the round trip reproduces the command exactly.
class LegMixer {
 public:
  LegMixer();

  Eigen::Matrix<double, 6, 4> mixing_matrix;                 // command -> legs
  Eigen::Matrix<double, 4, 6> effectiveness;                 // legs -> wrench
  Eigen::Matrix<double, 6, 1> leg_health = Eigen::Matrix<double, 6, 1>::Ones();
  double max_leg_thrust = 12.0;                              // N, per leg

  // Allocates, applies health mask and per-leg saturation.
  Eigen::Matrix<double, 6, 1> allocate(const GeneralizedForces& u) const;
  // Net wrench produced by a set of leg thrusts.
  GeneralizedForces net_wrench(const Eigen::Matrix<double, 6, 1>& legs) const;
};

// Leg index layout used by the mixer and the fault presets.
enum LegIndex {
  kFrontLeft = 0,
  kFrontRight = 1,
  kMidLeft = 2,
  kMidRight = 3,
  kRearLeft = 4,
  kRearRight = 5,
};

struct TargetMotionParams {
  Eigen::Vector3d speed_box{0.4, 0.4, 0.4};  // per-axis |v| bound, m/s
  int regime_min_steps = 50;
  int regime_max_steps = 250;
  double dt = 0.04;
};

struct TargetState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  int regime_timer = 0;  // steps remaining in the current constant-velocity segment
};

// Proportional inner loops: rate commands -> generalized force demand.
GeneralizedForces apply_rate_command(const RateCommand& command, const RobotState& state,
                                     const RateLoopGains& gains);

// One semi-implicit Euler step: forces evaluated at the current velocity,
// velocity updated first, then pose integrated with the new velocity.
// Drag is quadratic per body axis relative to the ambient current; the net
// vertical force is mass*g*(b_coef - 1) in world z.
RobotState step_dynamics(const RobotState& state, const RateCommand& command,
                         const HydroParams& params, const LegMixer& mixer, double dt,
                         const RateLoopGains& gains = RateLoopGains{});

// Advances the target one step; resamples velocity and segment length when
// the regime timer expires.
TargetState step_target(const TargetState& target, const TargetMotionParams& params, Rng& rng);

// Fixed-latency command queue. A command pushed at step t is released at
// step t + delay_steps; before the first command matures, pop returns the
// configured neutral command.
class DelayLine {
 public:
  explicit DelayLine(int delay_steps, RateCommand neutral = RateCommand{});

  void push(const RateCommand& command, std::int64_t t);
  RateCommand pop(std::int64_t t);

  int delay_steps() const { return delay_steps_; }
  std::size_t pending() const { return queue_.size(); }
  // Commands pushed at steps in (t - delay_steps, t], i.e. enqueued and not
  // yet released; used by the Markov-window sufficiency checks.
  std::vector<RateCommand> in_flight() const;

 private:
  struct Entry {
    std::int64_t pushed_at;
    RateCommand command;
  };
  int delay_steps_;
  RateCommand neutral_;
  std::deque<Entry> queue_;
  std::int64_t last_push_ = -1;
  std::int64_t last_pop_ = -1;
};

}  // namespace swimtrack::sim
