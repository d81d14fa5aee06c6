#include "swimtrack/presets.hpp"

#include <stdexcept>

namespace swimtrack::harness {

namespace {

control::PidGains read_gains(const Config& cfg, const std::string& prefix,
                             const control::PidGains& fallback) {
  control::PidGains g = fallback;
  g.kp = cfg.get_double(prefix + ".kp", fallback.kp);
  g.ki = cfg.get_double(prefix + ".ki", fallback.ki);
  g.kd = cfg.get_double(prefix + ".kd", fallback.kd);
  g.integral_limit = cfg.get_double(prefix + ".integral_limit", fallback.integral_limit);
  g.output_limit = cfg.get_double(prefix + ".output_limit", fallback.output_limit);
  return g;
}

}  // namespace

ScenarioParams default_scenario() { return ScenarioParams{}; }

ScenarioParams load_scenario(const Config& cfg, const std::string& scenario) {
  ScenarioParams p;

  p.dt = cfg.get_double("sim.dt", p.dt);

  p.hydro.rho = cfg.get_double("hydro.rho", p.hydro.rho);
  p.hydro.drag_coeffs = cfg.get_vec3("hydro.drag_coeffs", p.hydro.drag_coeffs);
  p.hydro.ref_areas = cfg.get_vec3("hydro.ref_areas", p.hydro.ref_areas);
  p.hydro.mass = cfg.get_double("hydro.mass", p.hydro.mass);
  p.hydro.g = cfg.get_double("hydro.g", p.hydro.g);
  p.hydro.b_coef = cfg.get_double("hydro.b_coef", p.hydro.b_coef);
  p.hydro.angular_damping = cfg.get_vec3("hydro.angular_damping", p.hydro.angular_damping);
  p.hydro.current = cfg.get_vec3("hydro.current", p.hydro.current);
  p.hydro.inertia_diag = cfg.get_vec3("hydro.inertia", p.hydro.inertia_diag);
  p.hydro.v_max = cfg.get_double("hydro.v_max", p.hydro.v_max);

  p.loops.kv_surge = cfg.get_double("loops.kv_surge", p.loops.kv_surge);
  p.loops.k_yaw = cfg.get_double("loops.k_yaw", p.loops.k_yaw);
  p.loops.k_pitch = cfg.get_double("loops.k_pitch", p.loops.k_pitch);
  p.loops.k_roll = cfg.get_double("loops.k_roll", p.loops.k_roll);
  p.loops.max_surge_force = cfg.get_double("loops.max_surge_force", p.loops.max_surge_force);
  p.loops.max_torque = cfg.get_double("loops.max_torque", p.loops.max_torque);
  p.loops.max_rate_cmd = cfg.get_double("loops.max_rate_cmd", p.loops.max_rate_cmd);
  p.loops.max_speed_cmd = cfg.get_double("loops.max_speed_cmd", p.loops.max_speed_cmd);
  p.loops.min_speed_cmd = cfg.get_double("loops.min_speed_cmd", p.loops.min_speed_cmd);

  p.mixer.max_leg_thrust = cfg.get_double("mixer.max_leg_thrust", p.mixer.max_leg_thrust);
  {
    const auto health = cfg.get_list("mixer.leg_health", {1, 1, 1, 1, 1, 1});
    if (health.size() != 6) throw std::runtime_error("mixer.leg_health needs 6 entries");
    for (int i = 0; i < 6; ++i) p.mixer.leg_health[i] = health[i];
  }

  p.target_motion.speed_box = cfg.get_vec3("target.speed_box", p.target_motion.speed_box);
  p.target_motion.regime_min_steps = cfg.get_int("target.regime_min", p.target_motion.regime_min_steps);
  p.target_motion.regime_max_steps = cfg.get_int("target.regime_max", p.target_motion.regime_max_steps);
  p.target_motion.dt = p.dt;

  p.camera.horizontal_fov = cfg.get_double("cam.hfov", p.camera.horizontal_fov);
  p.camera.vertical_fov = cfg.get_double("cam.vfov", p.camera.vertical_fov);
  p.camera.max_range = cfg.get_double("cam.max_range", p.camera.max_range);

  p.field.base_confidence = cfg.get_double("vision.base_confidence", p.field.base_confidence);
  p.field.left_bias_strength = cfg.get_double("vision.left_bias", p.field.left_bias_strength);
  p.field.noise_sigma = cfg.get_double("vision.conf_noise_sigma", p.field.noise_sigma);
  p.vnoise.center_sigma = cfg.get_double("vision.center_sigma", 0.02);
  p.vnoise.area_rel_sigma = cfg.get_double("vision.area_rel_sigma", 0.08);
  p.vnoise.p_drop = cfg.get_double("vision.p_drop", 0.15);
  p.target_shape.lateral_radius = cfg.get_double("vision.target_lateral_radius", p.target_shape.lateral_radius);
  p.target_shape.vertical_radius = cfg.get_double("vision.target_vertical_radius", p.target_shape.vertical_radius);

  p.kf_q_pos = cfg.get_double("kf.q_pos", p.kf_q_pos);
  p.kf_q_vel = cfg.get_double("kf.q_vel", p.kf_q_vel);
  p.tracker_cfg.iou_min = cfg.get_double("tracker.iou_min", p.tracker_cfg.iou_min);
  p.tracker_cfg.max_coast = cfg.get_int("tracker.max_coast", p.tracker_cfg.max_coast);

  p.yaw_gains = read_gains(cfg, "pid.yaw", p.yaw_gains);
  p.pitch_gains = read_gains(cfg, "pid.pitch", p.pitch_gains);
  p.forward_gains = read_gains(cfg, "pid.v", p.forward_gains);
  p.area_ref = cfg.get_double("pid.area_ref", p.area_ref);

  p.mu = cfg.get_double("agent.mu", p.mu);
  p.lambda = cfg.get_double("agent.lambda", p.lambda);
  p.scaling.area_scale = cfg.get_double("agent.area_scale", p.scaling.area_scale);
  p.scaling.v_scale = cfg.get_double("agent.v_scale", p.scaling.v_scale);
  p.scaling.rate_scale = cfg.get_double("agent.rate_scale", p.scaling.rate_scale);
  p.scaling.clip = cfg.get_double("agent.clip", p.scaling.clip);
  p.k_yaw = cfg.get_int("agent.k_yaw", p.k_yaw);
  p.k_pitch = cfg.get_int("agent.k_pitch", p.k_pitch);
  p.yaw_rate_max = cfg.get_double("agent.yaw_rate_max", p.yaw_rate_max);
  p.pitch_rate_max = cfg.get_double("agent.pitch_rate_max", p.pitch_rate_max);

  {
    const auto hidden = cfg.get_list("net.hidden", {});
    if (!hidden.empty()) {
      p.hidden.clear();
      for (double h : hidden) p.hidden.push_back(int(h));
    }
  }
  p.trainer.eta = cfg.get_double("trainer.eta", p.trainer.eta);
  p.trainer.gamma = cfg.get_double("trainer.gamma", p.trainer.gamma);
  p.trainer.tau = cfg.get_double("trainer.tau", p.trainer.tau);
  p.trainer.batch_size = std::size_t(cfg.get_int("trainer.batch_size", int(p.trainer.batch_size)));
  p.replay_capacity = std::size_t(cfg.get_int("trainer.replay_capacity", int(p.replay_capacity)));

  p.curriculum_cfg.min_prefill = std::size_t(cfg.get_int("curriculum.min_prefill", int(p.curriculum_cfg.min_prefill)));
  p.curriculum_cfg.decay_steps = cfg.get_int("curriculum.decay_steps", int(p.curriculum_cfg.decay_steps));
  p.curriculum_cfg.initial_fraction = cfg.get_double("curriculum.initial_fraction", p.curriculum_cfg.initial_fraction);
  p.curriculum_cfg.random_action_prob = cfg.get_double("curriculum.random_prob", p.curriculum_cfg.random_action_prob);

  p.spiral.r0 = cfg.get_double("spiral.r0", p.spiral.r0);
  p.spiral.radius_gain = cfg.get_double("spiral.radius_gain", p.spiral.radius_gain);
  p.spiral.dtheta = cfg.get_double("spiral.dtheta", p.spiral.dtheta);
  p.spiral.k_rate = cfg.get_double("spiral.k_rate", p.spiral.k_rate);
  p.spiral.v_search = cfg.get_double("spiral.v_search", p.spiral.v_search);
  p.spiral.max_radius = cfg.get_double("spiral.max_radius", p.spiral.max_radius);
  p.spiral_budget = cfg.get_int("trial.spiral_budget", p.spiral_budget);

  p.initial_range = cfg.get_double("trial.initial_range", p.initial_range);

  if (scenario == kScenarioNominal) {
    // no overrides
  } else if (scenario == kScenarioHighDamping) {
    const double factor = cfg.get_double("scenario.damping_factor", 6.0);
    p.hydro.angular_damping *= factor;
    p.hydro.b_coef = cfg.get_double("scenario.b_coef", 0.95);
  } else if (scenario == kScenarioLegFault) {
    p.mixer.leg_health[sim::kRearRight] = 0.0;
  } else {
    throw std::runtime_error("unknown scenario preset: " + scenario);
  }
  return p;
}

}  // namespace swimtrack::harness
