#include "swimtrack/studies.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "swimtrack/presets.hpp"
#include "swimtrack/stats.hpp"

namespace swimtrack::harness {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string mean_std_cell(const std::vector<double>& v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f +/- %.2f", stats::mean(v), stats::stddev(v));
  return buf;
}

std::vector<double> pick(const std::vector<TrialMetrics>& ms,
                         const std::function<double(const TrialMetrics&)>& f) {
  std::vector<double> out;
  out.reserve(ms.size());
  for (const auto& m : ms) out.push_back(f(m));
  return out;
}

struct CommonStudyCfg {
  int seeds;
  std::uint64_t base_seed;
  int delay_steps;
  int history;
  std::int64_t train_budget;
  int eval_frames;
  double eval_epsilon;
  int max_frames_train;
};

CommonStudyCfg read_common(const Config& cfg, const std::string& prefix) {
  CommonStudyCfg c;
  c.seeds = cfg.get_int(prefix + ".seeds", 5);
  c.base_seed = std::uint64_t(cfg.get_int(prefix + ".base_seed", 7));
  c.delay_steps = cfg.get_int(prefix + ".delay_steps", 10);
  c.history = cfg.get_int(prefix + ".history", 20);
  c.train_budget = cfg.get_int(prefix + ".train_budget", 60000);
  c.eval_frames = cfg.get_int(prefix + ".eval_frames", 12000);
  c.eval_epsilon = cfg.get_double(prefix + ".eval_epsilon", 0.02);
  c.max_frames_train = cfg.get_int(prefix + ".max_frames_train", 45000);
  return c;
}

SessionConfig session_cfg_for(const Config& cfg, const CommonStudyCfg& c, int history,
                              double reward_beta = 0.0) {
  SessionConfig s;
  s.history = history;
  s.delay_steps = c.delay_steps;
  s.reward_beta = reward_beta;
  s.epsilon.start = cfg.get_double("rl.epsilon_start", 0.20);
  s.epsilon.end = cfg.get_double("rl.epsilon_end", 0.02);
  s.epsilon.decay_steps = cfg.get_int("rl.epsilon_decay_steps", int(c.train_budget));
  s.max_frames_train = c.max_frames_train;
  return s;
}

}  // namespace

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int workers = std::min(jobs, n);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[std::size_t(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

Study1Result run_study1(const Config& cfg, const std::string& out_dir, int jobs) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const CommonStudyCfg c = read_common(cfg, "study1");
  std::vector<int> h_list;
  for (double h : cfg.get_list("study1.h_list", {5, 10, 20, 30})) h_list.push_back(int(h));

  const ScenarioParams params = load_scenario(cfg, kScenarioNominal);

  Study1Result result;
  result.h_list = h_list;
  for (int h : h_list) result.rl[h].resize(std::size_t(c.seeds));
  result.pid.resize(std::size_t(c.seeds));

  struct Job {
    int h;      // 0 = PID baseline
    int seed_idx;
  };
  std::vector<Job> jobs_list;
  for (int h : h_list)
    for (int i = 0; i < c.seeds; ++i) jobs_list.push_back({h, i});
  for (int i = 0; i < c.seeds; ++i) jobs_list.push_back({0, i});

  parallel_for(int(jobs_list.size()), jobs, [&](int j) {
    const Job job = jobs_list[std::size_t(j)];
    const std::uint64_t session_seed = derive_seed(c.base_seed, 100u * std::uint64_t(job.h) +
                                                                    std::uint64_t(job.seed_idx));
    TrialSettings eval;
    eval.delay_steps = c.delay_steps;
    eval.max_frames = c.eval_frames;
    eval.seed = derive_seed(session_seed, 0xE7A1);
    if (job.h == 0) {
      eval.history = c.history;
      eval.controller = ControllerKind::Pid;
      result.pid[std::size_t(job.seed_idx)] = run_pid_trial(params, eval);
    } else {
      TrainingSession session(params, session_cfg_for(cfg, c, job.h), session_seed);
      session.train(c.train_budget);
      eval.history = job.h;
      eval.controller = ControllerKind::Rl;
      eval.epsilon = c.eval_epsilon;
      result.rl[job.h][std::size_t(job.seed_idx)] = session.run_trial(params, eval);
    }
  });

  // Raw per-run metrics.
  {
    std::ofstream raw((fs::path(out_dir) / "study1_runs.csv").string());
    raw << "arm,seed,tracking_length,ecr_yaw,ecr_pitch,immediate_yaw_avg,immediate_pitch_avg,"
           "lost_events,terminal_loss\n";
    const auto row = [&](const std::string& arm, int seed, const TrialMetrics& m) {
      raw << arm << ',' << seed << ',' << m.tracking_length << ',' << fmt(m.ecr_yaw) << ','
          << fmt(m.ecr_pitch) << ',' << fmt(m.immediate_yaw_avg) << ','
          << fmt(m.immediate_pitch_avg) << ',' << m.lost_events << ',' << (m.terminal_loss ? 1 : 0)
          << "\n";
    };
    for (int h : h_list)
      for (int i = 0; i < c.seeds; ++i) row("H" + std::to_string(h), i, result.rl[h][std::size_t(i)]);
    for (int i = 0; i < c.seeds; ++i) row("PID", i, result.pid[std::size_t(i)]);
  }

  // Table-shaped comparison CSV: five metric rows, one column per arm.
  {
    std::ofstream table((fs::path(out_dir) / "study1_table.csv").string());
    table << "metric";
    for (int h : h_list) table << ",H" << h;
    table << ",PID\n";
    const auto metric_row = [&](const std::string& name,
                                const std::function<double(const TrialMetrics&)>& f) {
      table << name;
      for (int h : h_list) table << ',' << mean_std_cell(pick(result.rl[h], f));
      table << ',' << mean_std_cell(pick(result.pid, f)) << "\n";
    };
    metric_row("yaw_expected_cumulative_reward", [](const TrialMetrics& m) { return m.ecr_yaw; });
    metric_row("pitch_expected_cumulative_reward",
               [](const TrialMetrics& m) { return m.ecr_pitch; });
    metric_row("tracking_length", [](const TrialMetrics& m) { return double(m.tracking_length); });
    metric_row("yaw_immediate_reward_average",
               [](const TrialMetrics& m) { return m.immediate_yaw_avg; });
    metric_row("pitch_immediate_reward_average",
               [](const TrialMetrics& m) { return m.immediate_pitch_avg; });
  }
  return result;
}

Study2Result run_study2(const Config& cfg, const std::string& scenario, const std::string& out_dir,
                        int jobs) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  CommonStudyCfg c = read_common(cfg, "study2");
  c.seeds = cfg.get_int("study2.seeds", 10);
  const int adapt_trials = cfg.get_int("study2.adapt_trials", 4);
  const int block_frames = cfg.get_int("study2.block_frames", 6000);
  const std::int64_t pretrain = cfg.get_int("study2.pretrain_budget", int(c.train_budget));
  const double adapt_epsilon = cfg.get_double("study2.adapt_epsilon", 0.05);

  const ScenarioParams nominal = load_scenario(cfg, kScenarioNominal);
  const ScenarioParams stressed = load_scenario(cfg, scenario);

  Study2Result result;
  result.scenario = scenario;
  result.rl_yaw.resize(std::size_t(c.seeds));
  result.rl_pitch.resize(std::size_t(c.seeds));
  result.pid_yaw.resize(std::size_t(c.seeds));
  result.pid_pitch.resize(std::size_t(c.seeds));
  result.rl_final_var_yc.resize(std::size_t(c.seeds));
  result.pid_final_var_yc.resize(std::size_t(c.seeds));

  parallel_for(c.seeds, jobs, [&](int i) {
    const std::uint64_t session_seed = derive_seed(c.base_seed, 0x5742u + std::uint64_t(i));

    // RL arm: pretrain in the nominal scenario, then adapt online across the
    // sequential stressed trials.
    TrainingSession session(nominal, session_cfg_for(cfg, c, c.history), session_seed);
    session.train(pretrain);
    for (int b = 0; b < adapt_trials; ++b) {
      TrialSettings t;
      t.history = c.history;
      t.delay_steps = c.delay_steps;
      t.controller = ControllerKind::Rl;
      t.online_updates = true;
      t.epsilon = adapt_epsilon;
      t.max_frames = block_frames;
      t.seed = derive_seed(session_seed, 0xB10C + std::uint64_t(b));
      const TrialMetrics m = session.run_trial(stressed, t);
      result.rl_yaw[std::size_t(i)].push_back(m.immediate_yaw_avg);
      result.rl_pitch[std::size_t(i)].push_back(m.immediate_pitch_avg);
      if (b == adapt_trials - 1) result.rl_final_var_yc[std::size_t(i)] = m.var_yc;
    }

    // PID arm: same sequential trials, no adaptation mechanism.
    for (int b = 0; b < adapt_trials; ++b) {
      TrialSettings t;
      t.history = c.history;
      t.delay_steps = c.delay_steps;
      t.controller = ControllerKind::Pid;
      t.max_frames = block_frames;
      t.seed = derive_seed(session_seed, 0xB10C + std::uint64_t(b));
      const TrialMetrics m = run_pid_trial(stressed, t);
      result.pid_yaw[std::size_t(i)].push_back(m.immediate_yaw_avg);
      result.pid_pitch[std::size_t(i)].push_back(m.immediate_pitch_avg);
      if (b == adapt_trials - 1) result.pid_final_var_yc[std::size_t(i)] = m.var_yc;
    }
  });

  // Seed-averaged reward-vs-trial curves (per axis, both controllers).
  {
    std::ofstream out((fs::path(out_dir) / ("study2_" + scenario + "_reward_vs_trial.csv")).string());
    out << "trial,rl_yaw,rl_pitch,pid_yaw,pid_pitch\n";
    for (int b = 0; b < adapt_trials; ++b) {
      std::vector<double> ry, rp, py, pp;
      for (int i = 0; i < c.seeds; ++i) {
        ry.push_back(result.rl_yaw[std::size_t(i)][std::size_t(b)]);
        rp.push_back(result.rl_pitch[std::size_t(i)][std::size_t(b)]);
        py.push_back(result.pid_yaw[std::size_t(i)][std::size_t(b)]);
        pp.push_back(result.pid_pitch[std::size_t(i)][std::size_t(b)]);
      }
      out << b << ',' << fmt(stats::mean(ry)) << ',' << fmt(stats::mean(rp)) << ','
          << fmt(stats::mean(py)) << ',' << fmt(stats::mean(pp)) << "\n";
    }
  }
  return result;
}

Study3Result run_study3(const Config& cfg, const std::string& out_dir, int jobs) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  CommonStudyCfg c = read_common(cfg, "study3");
  c.seeds = cfg.get_int("study3.seeds", 5);
  const double beta = cfg.get_double("study3.beta", 0.5);
  const double left_bias = cfg.get_double("study3.left_bias", 0.4);
  const double p_drop = cfg.get_double("study3.p_drop", 0.4);

  ScenarioParams params = load_scenario(cfg, kScenarioNominal);
  params.field.left_bias_strength = left_bias;
  params.vnoise.p_drop = p_drop;

  Study3Result result;
  result.control.beta = 0.0;
  result.shaped.beta = beta;
  result.control.per_seed.resize(std::size_t(c.seeds));
  result.shaped.per_seed.resize(std::size_t(c.seeds));

  struct Job {
    bool shaped;
    int seed_idx;
  };
  std::vector<Job> jobs_list;
  for (int i = 0; i < c.seeds; ++i) jobs_list.push_back({false, i});
  for (int i = 0; i < c.seeds; ++i) jobs_list.push_back({true, i});

  parallel_for(int(jobs_list.size()), jobs, [&](int j) {
    const Job job = jobs_list[std::size_t(j)];
    const double arm_beta = job.shaped ? beta : 0.0;
    const std::uint64_t session_seed =
        derive_seed(c.base_seed, 0x533u + std::uint64_t(job.seed_idx));  // same seed pair per arm
    TrainingSession session(params, session_cfg_for(cfg, c, c.history, arm_beta), session_seed);
    session.train(c.train_budget);

    TrialSettings t;
    t.history = c.history;
    t.delay_steps = c.delay_steps;
    t.controller = ControllerKind::Rl;
    t.epsilon = c.eval_epsilon;
    t.max_frames = c.eval_frames;
    t.reward_beta = arm_beta;
    t.seed = derive_seed(session_seed, 0xE7A1);
    const TrialMetrics m = session.run_trial(params, t);
    auto& arm = job.shaped ? result.shaped : result.control;
    arm.per_seed[std::size_t(job.seed_idx)] = m;
  });

  {
    std::ofstream out((fs::path(out_dir) / "study3_report.csv").string());
    out << "arm,seed,steady_mean_xc,missed_rate,tracking_length\n";
    const auto rows = [&](const Study3Arm& arm, const std::string& name) {
      for (std::size_t i = 0; i < arm.per_seed.size(); ++i) {
        const auto& m = arm.per_seed[i];
        out << name << ',' << i << ',' << fmt(m.steady_mean_xc) << ',' << fmt(m.missed_rate) << ','
            << m.tracking_length << "\n";
      }
    };
    rows(result.control, "beta0");
    rows(result.shaped, "beta" + fmt(beta));
  }
  return result;
}

}  // namespace swimtrack::harness
