#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "swimtrack/agent.hpp"
#include "swimtrack/plots.hpp"
#include "swimtrack/presets.hpp"
#include "swimtrack/trial.hpp"

using namespace swimtrack;
using namespace swimtrack::harness;

namespace {

namespace fs = std::filesystem;

std::string tmp_path(const std::string& name) {
  return (fs::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScenarioParams benign_params() {
  ScenarioParams p;
  p.vnoise = vision::VisionNoise{};  // noiseless, no dropout
  p.field.noise_sigma = 0.0;
  p.target_motion.speed_box.setZero();
  return p;
}

}  // namespace

TEST_CASE("benign short PID trial tracks for exactly max_frames") {
  ScenarioParams p = benign_params();
  TrialSettings t;
  t.controller = ControllerKind::Pid;
  t.max_frames = 10;
  t.seed = 3;
  const TrialMetrics m = run_pid_trial(p, t);
  CHECK(m.tracking_length == 10);
  CHECK(m.lost_events == 0);
  CHECK_FALSE(m.terminal_loss);
  CHECK(m.immediate_yaw_avg > 0.0);
  CHECK(m.immediate_yaw_avg <= 1.0);
  CHECK(m.immediate_pitch_avg <= 1.0);
}

TEST_CASE("trial settings are validated before any stepping") {
  ScenarioParams p = benign_params();
  TrialSettings t;
  t.history = 0;
  CHECK_THROWS_AS(run_pid_trial(p, t), std::invalid_argument);
  t = TrialSettings{};
  t.max_frames = 0;
  CHECK_THROWS_AS(run_pid_trial(p, t), std::invalid_argument);
  t = TrialSettings{};
  t.epsilon = 2.0;
  CHECK_THROWS_AS(run_pid_trial(p, t), std::invalid_argument);
}

TEST_CASE("same config and seed reproduce byte-identical logs and summaries") {
  ScenarioParams p = default_scenario();  // full noise on
  const auto run_once = [&](const std::string& tag) {
    TrialSettings t;
    t.controller = ControllerKind::Pid;
    t.max_frames = 600;
    t.seed = 77;
    t.step_log_path = tmp_path("det_steps_" + tag + ".csv");
    const TrialMetrics m = run_pid_trial(p, t);
    write_trial_summary(tmp_path("det_summary_" + tag + ".csv"), t, "nominal", m);
    return m;
  };
  run_once("a");
  run_once("b");
  CHECK(slurp(tmp_path("det_steps_a.csv")) == slurp(tmp_path("det_steps_b.csv")));
  CHECK(slurp(tmp_path("det_summary_a.csv")) == slurp(tmp_path("det_summary_b.csv")));
  CHECK(!slurp(tmp_path("det_steps_a.csv")).empty());
}

TEST_CASE("per-step log reward column equals the reward formula on logged state") {
  ScenarioParams p = default_scenario();
  TrialSettings t;
  t.controller = ControllerKind::Pid;
  t.max_frames = 400;
  t.seed = 5;
  t.step_log_path = tmp_path("reward_check.csv");
  run_pid_trial(p, t);
  const auto rows = read_step_log(t.step_log_path);
  REQUIRE(rows.size() == 400);
  for (const auto& r : rows) {
    CHECK(r.reward ==
          doctest::Approx(agent::reward(r.x_c, r.y_c, p.mu, p.lambda)).epsilon(1e-12));
  }
}

TEST_CASE("metrics are recomputable from the per-step log alone") {
  ScenarioParams p = default_scenario();
  TrialSettings t;
  t.controller = ControllerKind::Pid;
  t.max_frames = 500;
  t.seed = 11;
  t.step_log_path = tmp_path("replay_check.csv");
  const TrialMetrics direct = run_pid_trial(p, t);
  const auto rows = read_step_log(t.step_log_path);
  const TrialMetrics replayed = metrics_from_rows(rows, p.mu, p.lambda);
  CHECK(replayed.tracking_length == direct.tracking_length);
  CHECK(replayed.ecr_yaw == doctest::Approx(direct.ecr_yaw).epsilon(1e-9));
  CHECK(replayed.ecr_pitch == doctest::Approx(direct.ecr_pitch).epsilon(1e-9));
  CHECK(replayed.immediate_yaw_avg == doctest::Approx(direct.immediate_yaw_avg).epsilon(1e-12));
  CHECK(replayed.missed_rate == doctest::Approx(direct.missed_rate).epsilon(1e-12));

  // Independent discount recomputation straight from the columns.
  double ecr = 0.0, disc = 1.0;
  for (const auto& r : rows) {
    ecr += disc * agent::reward_yaw_term(r.x_c, p.mu);
    disc *= kMetricGamma;
  }
  CHECK(ecr == doctest::Approx(direct.ecr_yaw).epsilon(1e-9));
}

TEST_CASE("stage-1 collection fills the replay with grid-expressible transitions") {
  ScenarioParams p = default_scenario();
  SessionConfig cfg;
  cfg.history = 5;
  cfg.delay_steps = 2;
  TrainingSession session(p, cfg, 21);

  CHECK(session.collect_stage1(0) == 0);
  CHECK(session.replay().size() == 0);

  const auto added = session.collect_stage1(300);
  CHECK(added >= 298);  // one open transition per trial boundary
  CHECK(session.replay().size() == std::size_t(added));
  const auto& grid = p.make_grid();
  for (std::size_t i = 0; i < session.replay().size(); ++i) {
    const auto& e = session.replay().at(i);
    CHECK(e.a_yaw >= 0);
    CHECK(e.a_yaw < int(grid.yaw_levels.size()));
    CHECK(e.a_pitch >= 0);
    CHECK(e.a_pitch < int(grid.pitch_levels.size()));
    CHECK(e.s.size() == 5 * agent::kFeatureDim);
    CHECK(e.r > 0.0);
    CHECK(e.r <= 2.0 + 1e-12);
  }
}

TEST_CASE("stage-1 rewards replay exactly from the logged state sequence") {
  ScenarioParams p = default_scenario();
  SessionConfig cfg;
  cfg.history = 5;
  cfg.delay_steps = 2;
  TrainingSession session(p, cfg, 33);
  TrialSettings t;
  t.history = 5;
  t.delay_steps = 2;
  t.controller = ControllerKind::Curriculum;
  t.max_frames = 250;
  t.seed = 14;
  t.step_log_path = tmp_path("stage1_steps.csv");
  session.run_trial(p, t);

  const auto rows = read_step_log(t.step_log_path);
  REQUIRE(rows.size() == 250);
  for (const auto& r : rows) CHECK(r.stage == 1);  // replay far below prefill
  REQUIRE(session.replay().size() == rows.size() - 1);
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const auto& e = session.replay().at(i);
    CHECK(e.r == doctest::Approx(agent::reward(rows[i + 1].x_c, rows[i + 1].y_c, p.mu, p.lambda))
                     .epsilon(1e-12));
  }
}

TEST_CASE("every completed environment transition produces exactly one experience") {
  ScenarioParams p = default_scenario();
  SessionConfig cfg;
  cfg.history = 4;
  cfg.delay_steps = 3;
  TrainingSession session(p, cfg, 9);
  TrialSettings t;
  t.history = 4;
  t.delay_steps = 3;
  t.controller = ControllerKind::Rl;
  t.epsilon = 0.5;
  t.max_frames = 300;
  t.seed = 4;
  const auto m = session.run_trial(p, t);
  CHECK(session.replay().total_pushed() == std::uint64_t(m.tracking_length - 1));

  // A second trial appends exactly the same accounting.
  const auto m2 = session.run_trial(p, t);
  CHECK(session.replay().total_pushed() ==
        std::uint64_t(m.tracking_length - 1 + m2.tracking_length - 1));
}

TEST_CASE("cap enforcement: logs never exceed max_frames rows") {
  ScenarioParams p = default_scenario();
  TrialSettings t;
  t.controller = ControllerKind::Pid;
  t.max_frames = 123;
  t.seed = 6;
  t.step_log_path = tmp_path("cap_check.csv");
  const auto m = run_pid_trial(p, t);
  CHECK(m.tracking_length <= 123);
  CHECK(read_step_log(t.step_log_path).size() == std::size_t(m.tracking_length));
}

TEST_CASE("curriculum trial logs stage transitions and shield decisions") {
  ScenarioParams p = default_scenario();
  p.curriculum_cfg.min_prefill = 150;
  p.curriculum_cfg.decay_steps = 400;
  SessionConfig cfg;
  cfg.history = 5;
  cfg.delay_steps = 2;
  TrainingSession session(p, cfg, 51);
  TrialSettings t;
  t.history = 5;
  t.delay_steps = 2;
  t.controller = ControllerKind::Curriculum;
  t.max_frames = 900;
  t.seed = 8;
  t.step_log_path = tmp_path("curr_steps.csv");
  t.curriculum_log_path = tmp_path("curr_log.csv");
  session.run_trial(p, t);

  const auto rows = read_step_log(t.step_log_path);
  REQUIRE(rows.size() == 900);

  // Stage numbers never regress and all three appear.
  int prev = 1;
  bool saw2 = false, saw3 = false;
  for (const auto& r : rows) {
    CHECK(r.stage >= prev);
    prev = std::max(prev, r.stage);
    saw2 = saw2 || r.stage == 2;
    saw3 = saw3 || r.stage == 3;
  }
  CHECK(saw2);
  CHECK(saw3);

  // Parse the curriculum log and re-check the shield property offline.
  std::ifstream in(t.curriculum_log_path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "step,stage,controller_in_charge,outer_fraction");
  std::size_t idx = 0;
  int violations = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string step_s, stage_s, ctrl, frac_s;
    std::getline(ss, step_s, ',');
    std::getline(ss, stage_s, ',');
    std::getline(ss, ctrl, ',');
    std::getline(ss, frac_s, ',');
    const double frac = std::stod(frac_s);
    const auto& r = rows[idx];
    const bool outer = std::max(std::abs(r.x_c), std::abs(r.y_c)) > 1.0 - frac;
    if (stage_s == "2" && outer && ctrl == "RL") ++violations;
    ++idx;
  }
  CHECK(idx == rows.size());
  CHECK(violations == 0);
}

TEST_CASE("trajectory log and plot emission work without touching the csvs") {
  const std::string dir = tmp_path("plots_dir");
  fs::create_directories(dir);
  ScenarioParams p = default_scenario();
  TrialSettings t;
  t.controller = ControllerKind::Pid;
  t.max_frames = 200;
  t.seed = 13;
  t.step_log_path = (fs::path(dir) / "run_steps.csv").string();
  t.trajectory_log_path = (fs::path(dir) / "run_trajectory.csv").string();
  run_pid_trial(p, t);

  const std::string before = slurp(t.step_log_path);
  const auto written = emit_plots(dir);
  CHECK(written.size() == 2);
  for (const auto& f : written) {
    CHECK(fs::exists(f));
    CHECK(fs::file_size(f) > 500);
  }
  CHECK(slurp(t.step_log_path) == before);
}

TEST_CASE("scenario presets apply their overrides") {
  Config cfg;
  const ScenarioParams nominal = load_scenario(cfg, kScenarioNominal);
  CHECK(nominal.mixer.leg_health.minCoeff() == 1.0);

  const ScenarioParams fault = load_scenario(cfg, kScenarioLegFault);
  CHECK(fault.mixer.leg_health[sim::kRearRight] == 0.0);
  CHECK(fault.mixer.leg_health.sum() == doctest::Approx(5.0));

  const ScenarioParams stressed = load_scenario(cfg, kScenarioHighDamping);
  CHECK(stressed.hydro.angular_damping.x() ==
        doctest::Approx(6.0 * nominal.hydro.angular_damping.x()));
  CHECK(stressed.hydro.b_coef < 1.0);

  CHECK_THROWS(load_scenario(cfg, "no_such_scenario"));

  Config overrides;
  overrides.set("hydro.rho", "1025");
  overrides.set("mixer.leg_health", "1,1,0.5,1,1,1");
  const ScenarioParams custom = load_scenario(overrides, kScenarioNominal);
  CHECK(custom.hydro.rho == 1025.0);
  CHECK(custom.mixer.leg_health[2] == 0.5);
}

TEST_CASE("config parsing: files, overrides, and error paths") {
  const Config cfg = Config::from_string(
      "# comment\n"
      "hydro.rho = 1000\n"
      "target.speed_box = 0.4, 0.3, 0.2\n"
      "trial.max_frames = 45000  # trailing comment\n"
      "flag.on = true\n");
  CHECK(cfg.get_double("hydro.rho", 0) == 1000.0);
  CHECK(cfg.get_vec3("target.speed_box", Eigen::Vector3d::Zero()).y() == 0.3);
  CHECK(cfg.get_int("trial.max_frames", 0) == 45000);
  CHECK(cfg.get_bool("flag.on", false));
  CHECK(cfg.get_double("missing.key", 3.5) == 3.5);
  CHECK_THROWS(Config::from_string("not a kv line\n"));
  CHECK_THROWS(cfg.get_double("flag.on", 0.0));

  Config o;
  o.set_override("a.b=12");
  CHECK(o.get_int("a.b", 0) == 12);
  CHECK_THROWS(o.set_override("nonsense"));
}

TEST_CASE("rl trial with online updates changes the network") {
  ScenarioParams p = default_scenario();
  p.trainer.batch_size = 20;
  p.trainer.eta = 1e-4;
  SessionConfig cfg;
  cfg.history = 5;
  cfg.delay_steps = 2;
  TrainingSession session(p, cfg, 61);
  session.collect_stage1(100);
  const Eigen::VectorXd before = session.net().params();
  TrialSettings t;
  t.history = 5;
  t.delay_steps = 2;
  t.controller = ControllerKind::Rl;
  t.online_updates = true;
  t.epsilon = 0.3;
  t.max_frames = 200;
  t.seed = 19;
  session.run_trial(p, t);
  CHECK((session.net().params() - before).cwiseAbs().maxCoeff() > 0.0);

  // Frozen evaluation leaves parameters untouched.
  const Eigen::VectorXd frozen = session.net().params();
  t.online_updates = false;
  session.run_trial(p, t);
  CHECK((session.net().params() - frozen).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("session checkpoint restores forward outputs bit-exactly") {
  ScenarioParams p = default_scenario();
  SessionConfig cfg;
  cfg.history = 6;
  cfg.delay_steps = 2;
  TrainingSession session(p, cfg, 71);
  const std::string path = tmp_path("session_ckpt.bin");
  session.save(path);

  TrainingSession restored(p, cfg, 999);  // different seed: different init
  restored.load(path);
  Eigen::VectorXd s = Eigen::VectorXd::Random(6 * agent::kFeatureDim);
  const auto a = session.net().forward(s);
  const auto b = restored.net().forward(s);
  CHECK(a.yaw == b.yaw);
  CHECK(a.pitch == b.pitch);
  fs::remove(path);
}
