#include "swimtrack/trial.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace swimtrack::harness {

namespace {

enum Stream : std::uint64_t {
  kPolicy = 21,
  kTrainSample = 22,
  kNetInit = 23,
  kEnv = 24,
  kStage1 = 25,
};

// %.17g round-trips doubles exactly, which the recompute-from-log checks
// rely on.
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int stage_number(curriculum::Stage s) {
  switch (s) {
    case curriculum::Stage::PidExplore: return 1;
    case curriculum::Stage::SharedControl: return 2;
    case curriculum::Stage::RlOnly: return 3;
  }
  return 0;
}

curriculum::CommandSource source_from_name(const std::string& name) {
  if (name == "RL") return curriculum::CommandSource::Rl;
  if (name == "PID") return curriculum::CommandSource::Pid;
  if (name == "RAND") return curriculum::CommandSource::Random;
  if (name == "SPIRAL") return curriculum::CommandSource::Spiral;
  throw std::runtime_error("unknown controller name in log: " + name);
}

}  // namespace

const char* controller_kind_name(ControllerKind k) {
  switch (k) {
    case ControllerKind::Pid: return "PID";
    case ControllerKind::Rl: return "RL";
    case ControllerKind::Curriculum: return "CURRICULUM";
  }
  return "?";
}

void TrialSettings::validate() const {
  if (history <= 0) throw std::invalid_argument("trial: history must be > 0");
  if (delay_steps < 0) throw std::invalid_argument("trial: delay_steps must be >= 0");
  if (max_frames <= 0) throw std::invalid_argument("trial: max_frames must be > 0");
  if (reward_beta < 0.0) throw std::invalid_argument("trial: reward_beta must be >= 0");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("trial: epsilon in [0,1]");
}

TrialMetrics metrics_from_rows(const std::vector<StepLogRow>& rows, double mu, double lambda,
                               double gamma) {
  TrialMetrics m;
  m.tracking_length = std::int64_t(rows.size());
  if (rows.empty()) return m;

  double disc = 1.0;
  double sum_yaw = 0.0, sum_pitch = 0.0, sum_reward = 0.0;
  double sum_xc = 0.0, sum_yc = 0.0, sum_yc2 = 0.0;
  std::int64_t missed = 0;
  bool prev_lost = false;
  for (const auto& r : rows) {
    const double yaw_term = agent::reward_yaw_term(r.x_c, mu);
    const double pitch_term = agent::reward_pitch_term(r.y_c, lambda);
    m.ecr_yaw += disc * yaw_term;
    m.ecr_pitch += disc * pitch_term;
    disc *= gamma;
    sum_yaw += yaw_term;
    sum_pitch += pitch_term;
    sum_reward += r.reward;
    sum_xc += r.x_c;
    sum_yc += r.y_c;
    sum_yc2 += r.y_c * r.y_c;
    if (!r.detected) ++missed;
    if (r.lost_flag && !prev_lost) ++m.lost_events;
    prev_lost = r.lost_flag;
  }
  const double n = double(rows.size());
  m.immediate_yaw_avg = sum_yaw / n;
  m.immediate_pitch_avg = sum_pitch / n;
  m.reward_avg = sum_reward / n;
  m.mean_xc = sum_xc / n;
  const double mean_yc = sum_yc / n;
  m.var_yc = sum_yc2 / n - mean_yc * mean_yc;
  m.missed_rate = double(missed) / n;

  const std::size_t warm = rows.size() / 5;
  double steady = 0.0;
  for (std::size_t i = warm; i < rows.size(); ++i) steady += rows[i].x_c;
  m.steady_mean_xc = steady / double(rows.size() - warm);
  return m;
}

void write_step_log(const std::string& path, const std::vector<StepLogRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write step log: " + path);
  out << kStepLogHeader << "\n";
  for (const auto& r : rows) {
    out << r.step << ',' << r.stage << ',' << curriculum::command_source_name(r.controller) << ','
        << fmt(r.x_c) << ',' << fmt(r.y_c) << ',' << fmt(r.area) << ',' << fmt(r.conf) << ','
        << (r.detected ? 1 : 0) << ',' << fmt(r.yaw_cmd) << ',' << fmt(r.pitch_cmd) << ','
        << fmt(r.v_cmd) << ',' << fmt(r.reward) << ',' << (r.lost_flag ? 1 : 0) << "\n";
  }
}

std::vector<StepLogRow> read_step_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read step log: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty step log: " + path);
  if (line != kStepLogHeader) throw std::runtime_error("unexpected step log header: " + path);
  std::vector<StepLogRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 13) throw std::runtime_error("malformed step log row: " + line);
    StepLogRow r;
    r.step = std::stoll(fields[0]);
    r.stage = std::stoi(fields[1]);
    r.controller = source_from_name(fields[2]);
    r.x_c = std::stod(fields[3]);
    r.y_c = std::stod(fields[4]);
    r.area = std::stod(fields[5]);
    r.conf = std::stod(fields[6]);
    r.detected = fields[7] == "1";
    r.yaw_cmd = std::stod(fields[8]);
    r.pitch_cmd = std::stod(fields[9]);
    r.v_cmd = std::stod(fields[10]);
    r.reward = std::stod(fields[11]);
    r.lost_flag = fields[12] == "1";
    rows.push_back(r);
  }
  return rows;
}

void write_trial_summary(const std::string& path, const TrialSettings& settings,
                         const std::string& scenario, const TrialMetrics& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trial summary: " + path);
  out << "scenario,controller,history,delay_steps,seed,max_frames,reward_beta,tracking_length,"
         "ecr_yaw,ecr_pitch,immediate_yaw_avg,immediate_pitch_avg,reward_avg,mean_xc,"
         "steady_mean_xc,var_yc,missed_rate,lost_events,terminal_loss\n";
  out << scenario << ',' << controller_kind_name(settings.controller) << ',' << settings.history
      << ',' << settings.delay_steps << ',' << settings.seed << ',' << settings.max_frames << ','
      << fmt(settings.reward_beta) << ',' << m.tracking_length << ',' << fmt(m.ecr_yaw) << ','
      << fmt(m.ecr_pitch) << ',' << fmt(m.immediate_yaw_avg) << ',' << fmt(m.immediate_pitch_avg)
      << ',' << fmt(m.reward_avg) << ',' << fmt(m.mean_xc) << ',' << fmt(m.steady_mean_xc) << ','
      << fmt(m.var_yc) << ',' << fmt(m.missed_rate) << ',' << m.lost_events << ','
      << (m.terminal_loss ? 1 : 0) << "\n";
}

double EpsilonSchedule::at(std::int64_t step) const {
  if (decay_steps <= 0) return end;
  const double t = std::min(1.0, double(step) / double(decay_steps));
  return start + (end - start) * t;
}

TrainingSession::TrainingSession(const ScenarioParams& params, const SessionConfig& cfg,
                                 std::uint64_t seed)
    : params_(params),
      cfg_(cfg),
      seed_(seed),
      grid_(params.make_grid()),
      current_(dqn::QNetwork::init_uniform(
          dqn::NetConfig{cfg.history * agent::kFeatureDim, params.hidden, params.k_yaw,
                         params.k_pitch},
          derive_seed(seed, kNetInit))),
      target_(current_),
      replay_(params.replay_capacity),
      schedule_(params.curriculum_cfg),
      train_rng_(derive_seed(seed, kTrainSample)),
      policy_rng_(derive_seed(seed, kPolicy)) {
  if (cfg.history <= 0) throw std::invalid_argument("session: history must be > 0");
  if (params.curriculum_cfg.min_prefill > params.replay_capacity) {
    throw std::invalid_argument("session: min_prefill cannot exceed replay capacity");
  }
  params_.trainer.validate();
  grid_.validate();
}

void TrainingSession::train(std::int64_t budget_steps) {
  const std::int64_t goal = env_steps_ + budget_steps;
  while (env_steps_ < goal) {
    LoopOptions opt;
    opt.controller = ControllerKind::Curriculum;
    opt.updates = true;
    opt.curriculum_active = true;
    opt.max_frames = cfg_.max_frames_train;
    opt.reward_beta = cfg_.reward_beta;
    opt.trial_seed = derive_seed(seed_, 1000 + std::uint64_t(trial_counter_));
    opt.step_budget = goal;
    run_loop(params_, opt);
  }
}

std::int64_t TrainingSession::collect_stage1(std::int64_t n_steps) {
  const std::uint64_t before = replay_.total_pushed();
  const std::int64_t goal = env_steps_ + n_steps;
  while (env_steps_ < goal) {
    LoopOptions opt;
    opt.controller = ControllerKind::Curriculum;
    opt.updates = false;
    opt.curriculum_active = false;  // hold stage 1 regardless of prefill
    opt.max_frames = cfg_.max_frames_train;
    opt.reward_beta = cfg_.reward_beta;
    opt.trial_seed = derive_seed(seed_, 1000 + std::uint64_t(trial_counter_));
    opt.step_budget = goal;
    opt.fixed_epsilon = 0.0;
    run_loop(params_, opt);
  }
  return std::int64_t(replay_.total_pushed() - before);
}

TrialMetrics TrainingSession::run_trial(const ScenarioParams& params,
                                        const TrialSettings& settings) {
  settings.validate();
  if (settings.history != cfg_.history) {
    throw std::invalid_argument("run_trial: history differs from the session's network input");
  }
  LoopOptions opt;
  opt.controller = settings.controller;
  opt.updates = settings.online_updates;
  opt.curriculum_active = settings.controller == ControllerKind::Curriculum;
  opt.fixed_epsilon = settings.epsilon;
  opt.max_frames = settings.max_frames;
  opt.reward_beta = settings.reward_beta;
  opt.trial_seed = settings.seed;
  opt.step_log = settings.step_log_path.empty() ? nullptr : &settings.step_log_path;
  opt.curriculum_log =
      settings.curriculum_log_path.empty() ? nullptr : &settings.curriculum_log_path;
  opt.trajectory_log =
      settings.trajectory_log_path.empty() ? nullptr : &settings.trajectory_log_path;
  return run_loop(params, opt);
}

TrialMetrics TrainingSession::run_loop(const ScenarioParams& params, const LoopOptions& opt) {
  ++trial_counter_;
  TrackingEnv env(params, cfg_.delay_steps, derive_seed(opt.trial_seed, kEnv));
  // Trial-scoped RNG streams keep evaluations reproducible regardless of
  // session history; training-owned streams would work but would couple a
  // trial's outputs to everything run before it.
  Rng policy_rng(derive_seed(opt.trial_seed, kPolicy));
  Rng sample_rng(derive_seed(opt.trial_seed, kTrainSample));
  Rng explore_rng(derive_seed(opt.trial_seed, kStage1));

  control::PidTrackingController pid(params.yaw_gains, params.pitch_gains, params.forward_gains,
                                     params.area_ref, params.dt);
  curriculum::SetpointExplorer setpoints(0.5);
  agent::AugmentedState window(cfg_.history, params.scaling);
  sim::RateCommand prev_cmd;

  std::optional<curriculum::RecoveryState> recovery;
  std::int64_t lost_streak = 0;

  struct Pending {
    Eigen::VectorXd s;
    int a_yaw;
    int a_pitch;
  };
  std::optional<Pending> pending;

  std::vector<StepLogRow> rows;
  rows.reserve(std::min<std::int64_t>(opt.max_frames, 1 << 20));
  std::ofstream curriculum_log;
  if (opt.curriculum_log) {
    curriculum_log.open(*opt.curriculum_log);
    curriculum_log << "step,stage,controller_in_charge,outer_fraction\n";
  }
  std::ofstream trajectory_log;
  if (opt.trajectory_log) {
    trajectory_log.open(*opt.trajectory_log);
    trajectory_log << "step,robot_x,robot_y,robot_z,target_x,target_y,target_z\n";
  }

  bool terminal_loss = false;
  const double beta = opt.reward_beta;

  for (int frame = 0; frame < opt.max_frames; ++frame) {
    if (opt.step_budget >= 0 && env_steps_ >= opt.step_budget) break;

    const SenseResult sense = env.sense();

    agent::StepFeatures f;
    f.x = sense.x_f;
    f.y = sense.y_f;
    f.area = sense.area_f;
    f.v_l = prev_cmd.forward_speed;
    f.a_yaw = prev_cmd.yaw_rate;
    f.a_pitch = prev_cmd.pitch_rate;
    window.push(f);

    const double r = agent::reward_with_confidence(sense.x_f, sense.y_f, sense.conf_f, params.mu,
                                                   params.lambda, beta);

    // Terminal check: the spiral budget ran out without reacquisition. The
    // pending transition is closed as terminal; this frame is not acted on
    // or logged.
    if (sense.lost && lost_streak > params.spiral_budget) {
      terminal_loss = true;
      if (pending) {
        replay_.push(dqn::Experience{std::move(pending->s), pending->a_yaw, pending->a_pitch, r,
                                     window.flat(), true});
        pending.reset();
      }
      break;
    }

    if (pending) {
      replay_.push(dqn::Experience{std::move(pending->s), pending->a_yaw, pending->a_pitch, r,
                                   window.flat(), false});
      pending.reset();
    }

    // Stage bookkeeping.
    curriculum::CurriculumStage stage{curriculum::Stage::PidExplore,
                                      params.curriculum_cfg.initial_fraction,
                                      params.curriculum_cfg.random_action_prob};
    int stage_no = 0;
    if (opt.curriculum_active) {
      stage = schedule_.advance(replay_.size());
      stage_no = stage_number(stage.stage);
    } else if (opt.controller == ControllerKind::Curriculum) {
      stage_no = 1;  // forced stage-1 collection
    }

    // Forward speed always comes from the PID velocity loop.
    const double v_cmd = pid.update_forward(sense.area_f);

    sim::RateCommand chosen;
    curriculum::CommandSource source = curriculum::CommandSource::Pid;
    int yaw_idx = grid_.nearest_yaw(0.0);
    int pitch_idx = grid_.nearest_pitch(0.0);

    if (sense.lost) {
      ++lost_streak;
      if (!recovery) {
        recovery = curriculum::start_recovery(sense.x_f, sense.y_f, params.camera.horizontal_fov,
                                              params.camera.vertical_fov);
        pid.reset();
      }
      chosen = curriculum::spiral_search_step(*recovery, params.spiral);
      chosen.forward_speed = std::min(v_cmd, params.spiral.v_search);
      source = curriculum::CommandSource::Spiral;
      yaw_idx = grid_.nearest_yaw(chosen.yaw_rate);
      pitch_idx = grid_.nearest_pitch(chosen.pitch_rate);
    } else {
      lost_streak = 0;
      recovery.reset();

      const double epsilon =
          opt.fixed_epsilon >= 0.0 ? opt.fixed_epsilon : cfg_.epsilon.at(env_steps_);

      const bool stage1 = (opt.controller == ControllerKind::Curriculum &&
                           (!opt.curriculum_active || stage.stage == curriculum::Stage::PidExplore));
      if (opt.controller == ControllerKind::Pid || stage1) {
        double x_set = 0.0, y_set = 0.0;
        if (stage1) {
          setpoints.step(explore_rng);
          x_set = setpoints.x_set();
          y_set = setpoints.y_set();
        }
        sim::RateCommand pid_cmd = pid.update_with_setpoint(sense.x_f, sense.y_f, x_set, y_set);
        pid_cmd.forward_speed = v_cmd;
        if (stage1) {
          // Quantize onto the action grid so the recorded transition is
          // expressible by the discrete policy.
          yaw_idx = grid_.nearest_yaw(pid_cmd.yaw_rate);
          pitch_idx = grid_.nearest_pitch(pid_cmd.pitch_rate);
          chosen.yaw_rate = grid_.yaw_levels[yaw_idx];
          chosen.pitch_rate = grid_.pitch_levels[pitch_idx];
          chosen.forward_speed = v_cmd;
        } else {
          chosen = pid_cmd;
          yaw_idx = grid_.nearest_yaw(pid_cmd.yaw_rate);
          pitch_idx = grid_.nearest_pitch(pid_cmd.pitch_rate);
        }
        source = curriculum::CommandSource::Pid;
      } else {
        const auto rl = agent::select_action(current_, window, epsilon, grid_, v_cmd, policy_rng);
        if (opt.curriculum_active && stage.stage == curriculum::Stage::SharedControl) {
          sim::RateCommand pid_cmd = pid.update_with_setpoint(sense.x_f, sense.y_f, 0.0, 0.0);
          pid_cmd.forward_speed = v_cmd;
          const auto decision = curriculum::shared_control_arbiter(
              sense.x_f, sense.y_f, stage, rl, pid_cmd, grid_, policy_rng);
          chosen = decision.command;
          source = decision.source;
          yaw_idx = decision.yaw_idx;
          pitch_idx = decision.pitch_idx;
        } else {
          chosen = rl.command;
          source = curriculum::CommandSource::Rl;
          yaw_idx = rl.yaw_idx;
          pitch_idx = rl.pitch_idx;
        }
      }
    }

    pending = Pending{window.flat(), yaw_idx, pitch_idx};

    StepLogRow row;
    row.step = env.step_index();
    row.stage = stage_no;
    row.controller = source;
    row.x_c = sense.x_f;
    row.y_c = sense.y_f;
    row.area = sense.area_f;
    row.conf = sense.conf_f;
    row.detected = sense.detected;
    row.yaw_cmd = chosen.yaw_rate;
    row.pitch_cmd = chosen.pitch_rate;
    row.v_cmd = chosen.forward_speed;
    row.reward = r;
    row.lost_flag = sense.lost;
    rows.push_back(row);

    if (curriculum_log.is_open()) {
      curriculum_log << row.step << ',' << stage_no << ','
                     << curriculum::command_source_name(source) << ','
                     << fmt(opt.curriculum_active ? stage.outer_region_fraction : 0.0) << "\n";
    }
    if (trajectory_log.is_open()) {
      const auto& rp = env.robot().position;
      const auto& tp = env.target().position;
      trajectory_log << row.step << ',' << fmt(rp.x()) << ',' << fmt(rp.y()) << ',' << fmt(rp.z())
                     << ',' << fmt(tp.x()) << ',' << fmt(tp.y()) << ',' << fmt(tp.z()) << "\n";
    }

    env.apply(chosen);
    prev_cmd = chosen;
    ++env_steps_;

    // One gradient step and one soft target update per environment step once
    // learning is active.
    const bool learning_stage =
        !opt.curriculum_active || stage.stage != curriculum::Stage::PidExplore;
    if (opt.updates && learning_stage && replay_.size() >= params.trainer.batch_size) {
      dqn::train_step(current_, target_, replay_, params.trainer, sample_rng);
    }
  }

  TrialMetrics m = metrics_from_rows(rows, params.mu, params.lambda);
  m.terminal_loss = terminal_loss;
  if (opt.step_log) write_step_log(*opt.step_log, rows);
  return m;
}

void TrainingSession::save(const std::string& path) const {
  dqn::save_checkpoint(current_, cfg_.history, path);
}

void TrainingSession::load(const std::string& path) {
  auto ckpt = dqn::load_checkpoint(path);
  if (ckpt.history != cfg_.history) {
    throw std::runtime_error("checkpoint history size does not match the session");
  }
  if (!(ckpt.net.config() == current_.config())) {
    throw std::runtime_error("checkpoint architecture does not match the session");
  }
  current_ = ckpt.net;
  target_ = current_;
}

TrialMetrics run_pid_trial(const ScenarioParams& params, const TrialSettings& settings) {
  SessionConfig cfg;
  cfg.history = settings.history;
  cfg.delay_steps = settings.delay_steps;
  cfg.reward_beta = settings.reward_beta;
  TrainingSession session(params, cfg, settings.seed);
  return session.run_trial(params, settings);
}

}  // namespace swimtrack::harness
