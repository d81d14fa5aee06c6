#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "swimtrack/rng.hpp"

namespace swimtrack::dqn {

struct NetConfig {
  int input_dim = 120;
  std::vector<int> hidden = {128, 128};
  int k_yaw = 7;
  int k_pitch = 7;

  bool operator==(const NetConfig&) const = default;
};

struct HeadValues {
  Eigen::VectorXd yaw;
  Eigen::VectorXd pitch;
};

// Shared-trunk MLP with ReLU hidden layers and two linear heads. All
// parameters live in one flat vector (trunk layers first, then the yaw and
// pitch heads; each layer stores its weight matrix column-major followed by
// its bias).
class QNetwork {
 public:
  explicit QNetwork(const NetConfig& cfg);

  // Uniform fan-in init: W ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
  static QNetwork init_uniform(const NetConfig& cfg, std::uint64_t seed);

  HeadValues forward(const Eigen::VectorXd& input) const;

  struct BatchCache {
    Eigen::MatrixXd input;                   // input_dim x B
    std::vector<Eigen::MatrixXd> pre;        // trunk pre-activations
    std::vector<Eigen::MatrixXd> post;       // trunk activations
    Eigen::MatrixXd q_yaw;                   // k_yaw x B
    Eigen::MatrixXd q_pitch;                 // k_pitch x B
  };
  BatchCache batch_forward(const Eigen::MatrixXd& input) const;

  // Backprop of upstream head gradients into a flat parameter gradient.
  // Both heads' gradients flow into the shared trunk.
  Eigen::VectorXd backward(const BatchCache& cache, const Eigen::MatrixXd& d_q_yaw,
                           const Eigen::MatrixXd& d_q_pitch) const;

  const NetConfig& config() const { return cfg_; }
  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }
  std::int64_t param_count() const { return params_.size(); }

 private:
  struct LayerSpan {
    std::int64_t w_offset;
    std::int64_t b_offset;
    int rows;
    int cols;
  };

  Eigen::Map<const Eigen::MatrixXd> weight(const LayerSpan& l) const;
  Eigen::Map<const Eigen::VectorXd> bias(const LayerSpan& l) const;

  NetConfig cfg_;
  std::vector<LayerSpan> trunk_;
  LayerSpan head_yaw_;
  LayerSpan head_pitch_;
  Eigen::VectorXd params_;
};

struct Experience {
  Eigen::VectorXd s;
  int a_yaw = 0;
  int a_pitch = 0;
  double r = 0.0;
  Eigen::VectorXd s_next;
  bool terminal = false;
};

// Fixed-capacity ring buffer with uniform batch sampling (no repeats within
// a batch).
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity);

  void push(Experience e);
  std::vector<const Experience*> sample(std::size_t batch, Rng& rng) const;

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t total_pushed() const { return total_pushed_; }
  const Experience& at(std::size_t logical_index) const;  // 0 = oldest

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::uint64_t total_pushed_ = 0;
  std::vector<Experience> items_;
};

struct TrainerParams {
  double eta = 1e-5;
  double gamma = 0.99;
  double tau = 0.001;
  std::size_t batch_size = 50;

  void validate() const;
};

struct TdTargets {
  Eigen::VectorXd yaw;    // one per sample
  Eigen::VectorXd pitch;
};

// Double-DQN targets, per head: the current network selects the next action,
// the target network evaluates it. Terminal samples bootstrap nothing.
TdTargets double_dqn_targets(const std::vector<const Experience*>& batch, const QNetwork& current,
                             const QNetwork& target, double gamma);

// Loss under the TD regression objective:
//   mean_b 1/2 [(Q_yaw(s_b, a_yaw_b) - t_yaw_b)^2 + (Q_pitch(...) - t_pitch_b)^2]
double td_loss(const QNetwork& net, const std::vector<const Experience*>& batch,
               const TdTargets& targets);

// One plain gradient-descent step on td_loss. Only the taken-action outputs
// carry loss gradient; the trunk receives both heads' contributions. Returns
// the pre-step loss.
double gradient_step(QNetwork& net, const std::vector<const Experience*>& batch,
                     const TdTargets& targets, double eta);

// theta_T <- tau * theta_C + (1 - tau) * theta_T
void soft_update(QNetwork& target, const QNetwork& current, double tau);

// Sample, compute targets, descend, soft-update. The usual per-environment-
// step training cycle. Returns the batch loss.
double train_step(QNetwork& current, QNetwork& target, const ReplayMemory& replay,
                  const TrainerParams& params, Rng& rng);

// Checkpoint layout: magic, version, history size, head sizes, trunk layer
// sizes, then the flat parameter block as little-endian 64-bit floats.
void save_checkpoint(const QNetwork& net, int history, const std::string& path);
struct Checkpoint {
  QNetwork net;
  int history;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace swimtrack::dqn
