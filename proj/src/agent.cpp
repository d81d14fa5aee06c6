#include "swimtrack/agent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace swimtrack::agent {

double reward_yaw_term(double x_c, double mu) { return mu / (std::abs(x_c) + mu); }
double reward_pitch_term(double y_c, double lambda) { return lambda / (std::abs(y_c) + lambda); }

double reward(double x_c, double y_c, double mu, double lambda) {
  if (!(mu > 0.0) || !(lambda > 0.0)) {
    throw std::invalid_argument("reward: mu and lambda must be > 0");
  }
  return reward_yaw_term(x_c, mu) + reward_pitch_term(y_c, lambda);
}

double reward_with_confidence(double x_c, double y_c, double c_d, double mu, double lambda,
                              double beta) {
  if (beta < 0.0) throw std::invalid_argument("reward_with_confidence: beta must be >= 0");
  return reward(x_c, y_c, mu, lambda) + beta * c_d;
}

AugmentedState::AugmentedState(int history, const FeatureScaling& scaling)
    : history_(history), scaling_(scaling) {
  if (history <= 0) throw std::invalid_argument("AugmentedState: history must be > 0");
  flat_ = Eigen::VectorXd::Zero(dim());
}

void AugmentedState::push(const StepFeatures& f) {
  const auto clip = [&](double v) { return std::clamp(v, -scaling_.clip, scaling_.clip); };
  // Shift one slot toward the front (oldest-first layout), append at the end.
  if (history_ > 1) {
    flat_.head(dim() - kFeatureDim) = flat_.tail(dim() - kFeatureDim).eval();
  }
  auto slot = flat_.tail(kFeatureDim);
  slot[0] = clip(f.x);
  slot[1] = clip(f.y);
  slot[2] = clip(f.area / scaling_.area_scale);
  slot[3] = clip(f.v_l / scaling_.v_scale);
  slot[4] = clip(f.a_yaw / scaling_.rate_scale);
  slot[5] = clip(f.a_pitch / scaling_.rate_scale);
}

void AugmentedState::reset() { flat_.setZero(); }

Eigen::Matrix<double, kFeatureDim, 1> AugmentedState::at(int i) const {
  if (i < 0 || i >= history_) throw std::out_of_range("AugmentedState::at");
  return flat_.segment<kFeatureDim>(std::int64_t(i) * kFeatureDim);
}

ActionGrid ActionGrid::symmetric(int k_yaw, double yaw_max, int k_pitch, double pitch_max) {
  if (k_yaw < 3 || k_pitch < 3 || k_yaw % 2 == 0 || k_pitch % 2 == 0) {
    throw std::invalid_argument("ActionGrid: head sizes must be odd and >= 3");
  }
  ActionGrid g;
  for (int i = 0; i < k_yaw; ++i) {
    g.yaw_levels.push_back(yaw_max * (2.0 * i / (k_yaw - 1) - 1.0));
  }
  for (int i = 0; i < k_pitch; ++i) {
    g.pitch_levels.push_back(pitch_max * (2.0 * i / (k_pitch - 1) - 1.0));
  }
  // Exact zero at the middle level.
  g.yaw_levels[k_yaw / 2] = 0.0;
  g.pitch_levels[k_pitch / 2] = 0.0;
  return g;
}

namespace {

int nearest_level(const std::vector<double>& levels, double rate) {
  int best = 0;
  double best_d = std::abs(rate - levels[0]);
  for (int i = 1; i < int(levels.size()); ++i) {
    const double d = std::abs(rate - levels[i]);
    if (d < best_d) {
      best = i;
      best_d = d;
    }
  }
  return best;
}

}  // namespace

int ActionGrid::nearest_yaw(double rate) const { return nearest_level(yaw_levels, rate); }
int ActionGrid::nearest_pitch(double rate) const { return nearest_level(pitch_levels, rate); }

void ActionGrid::validate() const {
  const auto check = [](const std::vector<double>& levels, const char* name) {
    if (levels.size() < 3) throw std::invalid_argument(std::string(name) + ": need >= 3 levels");
    for (std::size_t i = 1; i < levels.size(); ++i) {
      if (!(levels[i] > levels[i - 1])) {
        throw std::invalid_argument(std::string(name) + ": levels must be ascending");
      }
    }
    const std::size_t mid = levels.size() / 2;
    if (levels[mid] != 0.0) throw std::invalid_argument(std::string(name) + ": zero level required");
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (std::abs(levels[i] + levels[levels.size() - 1 - i]) > 1e-12) {
        throw std::invalid_argument(std::string(name) + ": levels must be symmetric about zero");
      }
    }
  };
  check(yaw_levels, "yaw_levels");
  check(pitch_levels, "pitch_levels");
}

namespace {

int greedy_index(const Eigen::VectorXd& q) {
  int best = 0;
  for (int i = 1; i < q.size(); ++i) {
    if (q[i] > q[best]) best = i;  // strict: ties keep the lowest index
  }
  return best;
}

}  // namespace

ActionChoice select_action(const dqn::QNetwork& net, const AugmentedState& s, double epsilon,
                           const ActionGrid& grid, double forward_speed, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("select_action: epsilon must be in [0,1]");
  }
  const auto q = net.forward(s.flat());
  if (q.yaw.size() != Eigen::Index(grid.yaw_levels.size()) ||
      q.pitch.size() != Eigen::Index(grid.pitch_levels.size())) {
    throw std::invalid_argument("select_action: grid does not match network heads");
  }

  ActionChoice choice;
  choice.yaw_idx = rng.bernoulli(epsilon) ? rng.uniform_int(int(grid.yaw_levels.size()))
                                          : greedy_index(q.yaw);
  choice.pitch_idx = rng.bernoulli(epsilon) ? rng.uniform_int(int(grid.pitch_levels.size()))
                                            : greedy_index(q.pitch);
  choice.command.yaw_rate = grid.yaw_levels[choice.yaw_idx];
  choice.command.pitch_rate = grid.pitch_levels[choice.pitch_idx];
  choice.command.forward_speed = forward_speed;
  return choice;
}

}  // namespace swimtrack::agent
