#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "swimtrack/config.hpp"
#include "swimtrack/trial.hpp"

namespace swimtrack::harness {

// Runs fn(0..n-1) on a small worker pool. Each job owns its full module
// stack; only the results vector (indexed by job) is shared.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

struct Study1Result {
  std::vector<int> h_list;
  std::map<int, std::vector<TrialMetrics>> rl;  // per history size, per seed
  std::vector<TrialMetrics> pid;                // per seed
};

struct Study2Result {
  std::string scenario;
  // [seed][sequential trial]
  std::vector<std::vector<double>> rl_yaw, rl_pitch, pid_yaw, pid_pitch;
  std::vector<double> rl_final_var_yc, pid_final_var_yc;  // per seed, last trial
};

struct Study3Arm {
  double beta = 0.0;
  std::vector<TrialMetrics> per_seed;
};

struct Study3Result {
  Study3Arm control;  // beta = 0
  Study3Arm shaped;   // beta > 0
};

// History-size ablation vs. the PID baseline (Table-shaped CSV mirroring the
// comparison study).
Study1Result run_study1(const Config& cfg, const std::string& out_dir, int jobs);

// Sequential-trial adaptation under a stressed scenario: online RL vs frozen
// PIDs, mean immediate reward per trial per axis.
Study2Result run_study2(const Config& cfg, const std::string& scenario, const std::string& out_dir,
                        int jobs);

// Confidence-shaped reward vs. the plain reward under a left-degraded
// detector.
Study3Result run_study3(const Config& cfg, const std::string& out_dir, int jobs);

}  // namespace swimtrack::harness
