#include "swimtrack/dqn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace swimtrack::dqn {

namespace {

constexpr char kMagic[8] = {'S', 'W', 'T', 'K', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

void write_f64(std::ostream& out, double d) {
  const auto bits = std::bit_cast<std::uint64_t>(d);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 8);
}

double read_f64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

QNetwork::QNetwork(const NetConfig& cfg) : cfg_(cfg) {
  if (cfg.input_dim <= 0 || cfg.k_yaw <= 0 || cfg.k_pitch <= 0) {
    throw std::invalid_argument("QNetwork: dimensions must be positive");
  }
  std::int64_t offset = 0;
  int in_dim = cfg.input_dim;
  for (int width : cfg.hidden) {
    if (width <= 0) throw std::invalid_argument("QNetwork: hidden width must be positive");
    LayerSpan l{offset, offset + std::int64_t(width) * in_dim, width, in_dim};
    offset = l.b_offset + width;
    trunk_.push_back(l);
    in_dim = width;
  }
  head_yaw_ = LayerSpan{offset, offset + std::int64_t(cfg.k_yaw) * in_dim, cfg.k_yaw, in_dim};
  offset = head_yaw_.b_offset + cfg.k_yaw;
  head_pitch_ = LayerSpan{offset, offset + std::int64_t(cfg.k_pitch) * in_dim, cfg.k_pitch, in_dim};
  offset = head_pitch_.b_offset + cfg.k_pitch;
  params_ = Eigen::VectorXd::Zero(offset);
}

QNetwork QNetwork::init_uniform(const NetConfig& cfg, std::uint64_t seed) {
  QNetwork net(cfg);
  Rng rng(seed);
  auto init_layer = [&](const LayerSpan& l) {
    const double bound = 1.0 / std::sqrt(double(l.cols));
    for (std::int64_t i = 0; i < std::int64_t(l.rows) * l.cols; ++i) {
      net.params_[l.w_offset + i] = rng.uniform(-bound, bound);
    }
    // biases stay zero
  };
  for (const auto& l : net.trunk_) init_layer(l);
  init_layer(net.head_yaw_);
  init_layer(net.head_pitch_);
  return net;
}

Eigen::Map<const Eigen::MatrixXd> QNetwork::weight(const LayerSpan& l) const {
  return {params_.data() + l.w_offset, l.rows, l.cols};
}

Eigen::Map<const Eigen::VectorXd> QNetwork::bias(const LayerSpan& l) const {
  return {params_.data() + l.b_offset, l.rows};
}

HeadValues QNetwork::forward(const Eigen::VectorXd& input) const {
  if (input.size() != cfg_.input_dim) {
    throw std::invalid_argument("QNetwork::forward: input dimension mismatch");
  }
  Eigen::VectorXd a = input;
  for (const auto& l : trunk_) {
    a = (weight(l) * a + bias(l)).cwiseMax(0.0).eval();
  }
  HeadValues out;
  out.yaw = weight(head_yaw_) * a + bias(head_yaw_);
  out.pitch = weight(head_pitch_) * a + bias(head_pitch_);
  return out;
}

QNetwork::BatchCache QNetwork::batch_forward(const Eigen::MatrixXd& input) const {
  if (input.rows() != cfg_.input_dim) {
    throw std::invalid_argument("QNetwork::batch_forward: input dimension mismatch");
  }
  BatchCache cache;
  cache.input = input;
  Eigen::MatrixXd a = input;
  for (const auto& l : trunk_) {
    Eigen::MatrixXd z = (weight(l) * a).colwise() + bias(l);
    cache.pre.push_back(z);
    a = z.cwiseMax(0.0);
    cache.post.push_back(a);
  }
  cache.q_yaw = (weight(head_yaw_) * a).colwise() + bias(head_yaw_);
  cache.q_pitch = (weight(head_pitch_) * a).colwise() + bias(head_pitch_);
  return cache;
}

Eigen::VectorXd QNetwork::backward(const BatchCache& cache, const Eigen::MatrixXd& d_q_yaw,
                                   const Eigen::MatrixXd& d_q_pitch) const {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params_.size());
  const Eigen::MatrixXd& trunk_out = cache.post.empty() ? cache.input : cache.post.back();

  auto head_backward = [&](const LayerSpan& l, const Eigen::MatrixXd& d_q) {
    Eigen::Map<Eigen::MatrixXd>(grad.data() + l.w_offset, l.rows, l.cols) =
        d_q * trunk_out.transpose();
    Eigen::Map<Eigen::VectorXd>(grad.data() + l.b_offset, l.rows) = d_q.rowwise().sum();
  };
  head_backward(head_yaw_, d_q_yaw);
  head_backward(head_pitch_, d_q_pitch);

  // Shared trunk sees both heads.
  Eigen::MatrixXd d_a =
      weight(head_yaw_).transpose() * d_q_yaw + weight(head_pitch_).transpose() * d_q_pitch;

  for (int i = int(trunk_.size()) - 1; i >= 0; --i) {
    const auto& l = trunk_[i];
    const Eigen::MatrixXd d_z =
        d_a.cwiseProduct((cache.pre[i].array() > 0.0).cast<double>().matrix());
    const Eigen::MatrixXd& below = (i == 0) ? cache.input : cache.post[i - 1];
    Eigen::Map<Eigen::MatrixXd>(grad.data() + l.w_offset, l.rows, l.cols) =
        d_z * below.transpose();
    Eigen::Map<Eigen::VectorXd>(grad.data() + l.b_offset, l.rows) = d_z.rowwise().sum();
    if (i > 0) d_a = weight(l).transpose() * d_z;
  }
  return grad;
}

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("ReplayMemory: capacity must be > 0");
  items_.reserve(capacity);
}

void ReplayMemory::push(Experience e) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(e));
  } else {
    items_[next_] = std::move(e);
  }
  next_ = (next_ + 1) % capacity_;
  ++total_pushed_;
}

const Experience& ReplayMemory::at(std::size_t logical_index) const {
  if (logical_index >= items_.size()) throw std::out_of_range("ReplayMemory::at");
  if (items_.size() < capacity_) return items_[logical_index];
  return items_[(next_ + logical_index) % capacity_];
}

std::vector<const Experience*> ReplayMemory::sample(std::size_t batch, Rng& rng) const {
  if (batch > items_.size()) {
    throw std::invalid_argument("ReplayMemory::sample: batch larger than stored items");
  }
  // Partial Fisher-Yates over an index array: uniform, no repeats.
  std::vector<std::size_t> idx(items_.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::vector<const Experience*> out;
  out.reserve(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    const std::size_t j = i + std::size_t(rng.uniform_int(int(idx.size() - i)));
    std::swap(idx[i], idx[j]);
    out.push_back(&items_[idx[i]]);
  }
  return out;
}

void TrainerParams::validate() const {
  if (!(eta > 0.0)) throw std::invalid_argument("trainer: eta must be > 0");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("trainer: gamma must be in (0,1)");
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("trainer: tau must be in (0,1]");
  if (batch_size == 0) throw std::invalid_argument("trainer: batch_size must be > 0");
}

namespace {

Eigen::MatrixXd stack_next_states(const std::vector<const Experience*>& batch, int dim) {
  Eigen::MatrixXd m(dim, batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) m.col(b) = batch[b]->s_next;
  return m;
}

Eigen::MatrixXd stack_states(const std::vector<const Experience*>& batch, int dim) {
  Eigen::MatrixXd m(dim, batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) m.col(b) = batch[b]->s;
  return m;
}

}  // namespace

TdTargets double_dqn_targets(const std::vector<const Experience*>& batch, const QNetwork& current,
                             const QNetwork& target, double gamma) {
  if (batch.empty()) throw std::invalid_argument("double_dqn_targets: empty batch");
  const int dim = current.config().input_dim;
  const Eigen::MatrixXd next = stack_next_states(batch, dim);
  const auto sel = current.batch_forward(next);
  const auto eval = target.batch_forward(next);

  TdTargets t;
  t.yaw.resize(batch.size());
  t.pitch.resize(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    if (batch[b]->terminal) {
      t.yaw[b] = batch[b]->r;
      t.pitch[b] = batch[b]->r;
      continue;
    }
    int a_yaw = 0, a_pitch = 0;
    sel.q_yaw.col(b).maxCoeff(&a_yaw);
    sel.q_pitch.col(b).maxCoeff(&a_pitch);
    t.yaw[b] = batch[b]->r + gamma * eval.q_yaw(a_yaw, b);
    t.pitch[b] = batch[b]->r + gamma * eval.q_pitch(a_pitch, b);
  }
  return t;
}

double td_loss(const QNetwork& net, const std::vector<const Experience*>& batch,
               const TdTargets& targets) {
  const auto cache = net.batch_forward(stack_states(batch, net.config().input_dim));
  double loss = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const double ey = cache.q_yaw(batch[b]->a_yaw, b) - targets.yaw[b];
    const double ep = cache.q_pitch(batch[b]->a_pitch, b) - targets.pitch[b];
    loss += 0.5 * (ey * ey + ep * ep);
  }
  return loss / double(batch.size());
}

double gradient_step(QNetwork& net, const std::vector<const Experience*>& batch,
                     const TdTargets& targets, double eta) {
  if (batch.empty()) throw std::invalid_argument("gradient_step: empty batch");
  if (targets.yaw.size() != Eigen::Index(batch.size()) ||
      targets.pitch.size() != Eigen::Index(batch.size())) {
    throw std::invalid_argument("gradient_step: targets misaligned with batch");
  }
  const auto cache = net.batch_forward(stack_states(batch, net.config().input_dim));

  Eigen::MatrixXd d_q_yaw = Eigen::MatrixXd::Zero(net.config().k_yaw, batch.size());
  Eigen::MatrixXd d_q_pitch = Eigen::MatrixXd::Zero(net.config().k_pitch, batch.size());
  double loss = 0.0;
  const double inv_b = 1.0 / double(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const int ay = batch[b]->a_yaw;
    const int ap = batch[b]->a_pitch;
    if (ay < 0 || ay >= net.config().k_yaw || ap < 0 || ap >= net.config().k_pitch) {
      throw std::invalid_argument("gradient_step: action index out of range");
    }
    const double ey = cache.q_yaw(ay, b) - targets.yaw[b];
    const double ep = cache.q_pitch(ap, b) - targets.pitch[b];
    loss += 0.5 * (ey * ey + ep * ep);
    d_q_yaw(ay, b) = ey * inv_b;
    d_q_pitch(ap, b) = ep * inv_b;
  }
  loss *= inv_b;
  if (!std::isfinite(loss)) throw std::runtime_error("gradient_step: non-finite loss");

  const Eigen::VectorXd grad = net.backward(cache, d_q_yaw, d_q_pitch);
  net.params() -= eta * grad;
  return loss;
}

void soft_update(QNetwork& target, const QNetwork& current, double tau) {
  if (target.config() != current.config()) {
    throw std::invalid_argument("soft_update: network architectures differ");
  }
  target.params() = tau * current.params() + (1.0 - tau) * target.params();
}

double train_step(QNetwork& current, QNetwork& target, const ReplayMemory& replay,
                  const TrainerParams& params, Rng& rng) {
  const auto batch = replay.sample(params.batch_size, rng);
  const auto targets = double_dqn_targets(batch, current, target, params.gamma);
  const double loss = gradient_step(current, batch, targets, params.eta);
  soft_update(target, current, params.tau);
  return loss;
}

void save_checkpoint(const QNetwork& net, int history, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_u32(out, kVersion);
  write_u32(out, std::uint32_t(history));
  write_u32(out, std::uint32_t(net.config().k_yaw));
  write_u32(out, std::uint32_t(net.config().k_pitch));
  const auto& hidden = net.config().hidden;
  write_u32(out, std::uint32_t(hidden.size() + 1));
  write_u32(out, std::uint32_t(net.config().input_dim));
  for (int w : hidden) write_u32(out, std::uint32_t(w));
  write_u32(out, std::uint32_t(net.param_count()));
  for (std::int64_t i = 0; i < net.param_count(); ++i) write_f64(out, net.params()[i]);
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("bad checkpoint magic: " + path);
  }
  const std::uint32_t version = read_u32(in);
  if (version != kVersion) throw std::runtime_error("unsupported checkpoint version");
  NetConfig cfg;
  const int history = int(read_u32(in));
  cfg.k_yaw = int(read_u32(in));
  cfg.k_pitch = int(read_u32(in));
  const std::uint32_t n_sizes = read_u32(in);
  if (n_sizes == 0 || n_sizes > 64) throw std::runtime_error("corrupt checkpoint layer count");
  cfg.input_dim = int(read_u32(in));
  cfg.hidden.clear();
  for (std::uint32_t i = 1; i < n_sizes; ++i) cfg.hidden.push_back(int(read_u32(in)));
  const std::uint32_t n_params = read_u32(in);
  QNetwork net(cfg);
  if (std::int64_t(n_params) != net.param_count()) {
    throw std::runtime_error("checkpoint parameter count mismatch");
  }
  for (std::uint32_t i = 0; i < n_params; ++i) net.params()[i] = read_f64(in);
  if (!in) throw std::runtime_error("checkpoint truncated: " + path);
  return Checkpoint{std::move(net), history};
}

}  // namespace swimtrack::dqn
