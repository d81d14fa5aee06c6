#pragma once

#include <deque>
#include <vector>

#include <Eigen/Core>

#include "swimtrack/dqn.hpp"
#include "swimtrack/rng.hpp"
#include "swimtrack/sim.hpp"

namespace swimtrack::agent {

inline constexpr int kFeatureDim = 6;

// Image-centering reward: mu / (|x_c| + mu) + lambda / (|y_c| + lambda).
// Each term lies in (0, 1]; the sum peaks at 2 when the target is centered.
double reward(double x_c, double y_c, double mu, double lambda);
double reward_yaw_term(double x_c, double mu);
double reward_pitch_term(double y_c, double lambda);

// Centering reward plus an additive detection-confidence bonus beta * c_d;
// beta = 0 recovers the plain reward.
double reward_with_confidence(double x_c, double y_c, double c_d, double mu, double lambda,
                              double beta);

// Per-step controller-visible features: filtered bbox position and area, the
// forward-speed command from the PID, and the previously commanded rates.
// Built from tracker output and the agent's own command history only.
struct StepFeatures {
  double x = 0.0;
  double y = 0.0;
  double area = 0.0;
  double v_l = 0.0;
  double a_yaw = 0.0;
  double a_pitch = 0.0;
};

struct FeatureScaling {
  double area_scale = 0.1;   // divisor for area
  double v_scale = 1.0;      // divisor for forward speed
  double rate_scale = 0.5;   // divisor for yaw/pitch rates
  double clip = 2.0;         // per-component clamp after scaling
};

// Sliding window of the last H feature vectors, flattened oldest-first.
// Pre-filled with neutral features so the state has full size from step one.
class AugmentedState {
 public:
  AugmentedState(int history, const FeatureScaling& scaling);

  void push(const StepFeatures& f);
  void reset();

  const Eigen::VectorXd& flat() const { return flat_; }
  int history() const { return history_; }
  int dim() const { return history_ * kFeatureDim; }
  bool sufficient_for_delay(int delay_steps) const { return history_ > delay_steps; }
  // Scaled feature six-tuple at window slot i (0 = oldest).
  Eigen::Matrix<double, kFeatureDim, 1> at(int i) const;

 private:
  int history_;
  FeatureScaling scaling_;
  Eigen::VectorXd flat_;
};

// Discrete, symmetric-about-zero rate levels for each head.
struct ActionGrid {
  std::vector<double> yaw_levels;
  std::vector<double> pitch_levels;

  static ActionGrid symmetric(int k_yaw, double yaw_max, int k_pitch, double pitch_max);
  int nearest_yaw(double rate) const;
  int nearest_pitch(double rate) const;
  void validate() const;
};

struct ActionChoice {
  int yaw_idx = 0;
  int pitch_idx = 0;
  sim::RateCommand command;
};

// Epsilon-greedy per head: with probability epsilon an index is drawn
// uniformly, otherwise the head's argmax (ties resolve to the lowest index).
// The forward speed is passed through from the PID velocity loop.
ActionChoice select_action(const dqn::QNetwork& net, const AugmentedState& s, double epsilon,
                           const ActionGrid& grid, double forward_speed, Rng& rng);

}  // namespace swimtrack::agent
