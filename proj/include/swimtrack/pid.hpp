#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "swimtrack/sim.hpp"
#include "swimtrack/tracker.hpp"

namespace swimtrack::control {

struct PidGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
  double integral_limit = 0.5;
  double output_limit = 0.5;
};

struct PidState {
  double integral = 0.0;
  double prev_error = 0.0;
  bool initialized = false;
};

// One PID update. Backward-difference derivative (zero on the first call),
// integral clamped to +/- integral_limit before use.
std::pair<double, PidState> pid_step(const PidGains& gains, const PidState& state, double error,
                                     double dt);

// Discrete gain search: one trial per candidate via the supplied evaluator,
// highest score wins, earliest candidate wins ties.
struct TuneResult {
  PidGains best;
  std::vector<double> scores;  // aligned with the candidate list
};
TuneResult tune_gains(const std::vector<PidGains>& candidates,
                      const std::function<double(const PidGains&)>& evaluate);

// Builds the default 27-point kp/ki/kd candidate grid from three values per
// term.
std::vector<PidGains> gain_grid(const std::vector<double>& kps, const std::vector<double>& kis,
                                const std::vector<double>& kds, double integral_limit,
                                double output_limit);

// Decentralized image-space tracking: yaw-rate PID on x_c, pitch-rate PID on
// y_c (both driven to zero), forward-speed PID on the bbox-area error.
class PidTrackingController {
 public:
  PidTrackingController(const PidGains& yaw, const PidGains& pitch, const PidGains& forward,
                        double area_ref, double dt)
      : yaw_gains_(yaw), pitch_gains_(pitch), forward_gains_(forward), area_ref_(area_ref), dt_(dt) {}

  sim::RateCommand update(const tracker::TrackState& track, bool lost);
  // Yaw/pitch loops driving the image position toward an arbitrary
  // setpoint; the centering controller is the (0, 0) case.
  sim::RateCommand update_with_setpoint(double x_c, double y_c, double x_set, double y_set);
  // Forward-speed loop alone; used while yaw/pitch are owned by another
  // controller.
  double update_forward(double area);

  void reset();
  double area_ref() const { return area_ref_; }

 private:
  PidGains yaw_gains_, pitch_gains_, forward_gains_;
  PidState yaw_state_, pitch_state_, forward_state_;
  double area_ref_;
  double dt_;
};

}  // namespace swimtrack::control
