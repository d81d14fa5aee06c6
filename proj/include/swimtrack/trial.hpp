#pragma once

#include <optional>
#include <string>
#include <vector>

#include "swimtrack/env.hpp"

namespace swimtrack::harness {

enum class ControllerKind { Pid, Rl, Curriculum };

const char* controller_kind_name(ControllerKind k);

struct TrialSettings {
  int history = 20;
  int delay_steps = 10;
  std::uint64_t seed = 1;
  ControllerKind controller = ControllerKind::Pid;
  int max_frames = 45000;
  double reward_beta = 0.0;
  bool online_updates = false;  // gradient + soft updates during the trial
  double epsilon = 0.0;         // exploration while the RL head is in charge
  std::string step_log_path;        // per-step CSV, empty = no log
  std::string curriculum_log_path;  // arbiter/stage CSV, empty = no log
  std::string trajectory_log_path;  // world-frame positions, empty = no log

  void validate() const;
};

// Everything the studies need, all recomputable from the per-step log.
struct TrialMetrics {
  std::int64_t tracking_length = 0;
  double ecr_yaw = 0.0;    // sum_t gamma^t * yaw term
  double ecr_pitch = 0.0;
  double immediate_yaw_avg = 0.0;
  double immediate_pitch_avg = 0.0;
  double reward_avg = 0.0;
  double mean_xc = 0.0;
  double steady_mean_xc = 0.0;  // mean x_c after the first 20% of the trial
  double var_yc = 0.0;
  double missed_rate = 0.0;     // fraction of frames with no detection
  int lost_events = 0;
  bool terminal_loss = false;
};

// One row of the per-step log, in the pinned column order.
struct StepLogRow {
  std::int64_t step = 0;
  int stage = 0;  // 0 when not running the curriculum
  curriculum::CommandSource controller = curriculum::CommandSource::Pid;
  double x_c = 0.0;
  double y_c = 0.0;
  double area = 0.0;
  double conf = 0.0;
  bool detected = false;
  double yaw_cmd = 0.0;
  double pitch_cmd = 0.0;
  double v_cmd = 0.0;
  double reward = 0.0;
  bool lost_flag = false;
};

inline constexpr const char* kStepLogHeader =
    "step,stage,controller,x_c,y_c,area,conf,detected,yaw_cmd,pitch_cmd,v_cmd,reward,lost_flag";

// Discount used when folding a trial's per-step rewards into the cumulative
// metric.
inline constexpr double kMetricGamma = 0.99;

TrialMetrics metrics_from_rows(const std::vector<StepLogRow>& rows, double mu, double lambda,
                               double gamma = kMetricGamma);

std::vector<StepLogRow> read_step_log(const std::string& path);
void write_step_log(const std::string& path, const std::vector<StepLogRow>& rows);
void write_trial_summary(const std::string& path, const TrialSettings& settings,
                         const std::string& scenario, const TrialMetrics& m);

struct EpsilonSchedule {
  double start = 0.20;
  double end = 0.02;
  std::int64_t decay_steps = 100000;

  double at(std::int64_t step) const;
};

struct SessionConfig {
  int history = 20;
  int delay_steps = 10;
  double reward_beta = 0.0;
  EpsilonSchedule epsilon;
  int max_frames_train = 45000;  // cap per training trial
  std::string scenario_name = "nominal";
};

// Owns the learner state (networks, replay, curriculum schedule) that
// persists across the sequential trials of one seed. The environment is
// rebuilt per trial; learning is continual across them.
class TrainingSession {
 public:
  TrainingSession(const ScenarioParams& params, const SessionConfig& cfg, std::uint64_t seed);

  // Curriculum-driven training for a total environment-step budget.
  void train(std::int64_t budget_steps);
  // Stage-1 exploration only (no updates); returns experiences recorded.
  std::int64_t collect_stage1(std::int64_t n_steps);
  // One trial with the current networks under the given settings. Gradient
  // updates run only when settings.online_updates is set.
  TrialMetrics run_trial(const ScenarioParams& params, const TrialSettings& settings);

  dqn::QNetwork& net() { return current_; }
  const dqn::QNetwork& net() const { return current_; }
  dqn::QNetwork& target_net() { return target_; }
  dqn::ReplayMemory& replay() { return replay_; }
  curriculum::CurriculumSchedule& schedule() { return schedule_; }
  std::int64_t total_env_steps() const { return env_steps_; }
  const ScenarioParams& base_params() const { return params_; }
  const SessionConfig& config() const { return cfg_; }

  void save(const std::string& path) const;
  void load(const std::string& path);

 private:
  struct LoopOptions {
    ControllerKind controller;
    bool updates;
    bool curriculum_active;  // stage machine decides the controller
    double fixed_epsilon = -1.0;  // <0: schedule-driven
    int max_frames;
    double reward_beta;
    std::uint64_t trial_seed;
    const std::string* step_log = nullptr;
    const std::string* curriculum_log = nullptr;
    const std::string* trajectory_log = nullptr;
    std::int64_t step_budget = -1;  // stop training early when reached (<0: off)
  };
  TrialMetrics run_loop(const ScenarioParams& params, const LoopOptions& opt);

  ScenarioParams params_;
  SessionConfig cfg_;
  std::uint64_t seed_;
  agent::ActionGrid grid_;
  dqn::QNetwork current_;
  dqn::QNetwork target_;
  dqn::ReplayMemory replay_;
  curriculum::CurriculumSchedule schedule_;
  Rng train_rng_;
  Rng policy_rng_;
  std::int64_t env_steps_ = 0;
  std::int64_t trial_counter_ = 0;
};

// Convenience wrapper for controller kinds that need no learner state.
TrialMetrics run_pid_trial(const ScenarioParams& params, const TrialSettings& settings);

}  // namespace swimtrack::harness
