#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include "rleceo/env.hpp"
#include "rleceo/error.hpp"
#include "rleceo/network.hpp"
#include "rleceo/random.hpp"

namespace rleceo {

struct TrainConfig {
  std::size_t max_epoch = 50;
  double lr_start = 5e-3;
  double lr_end = 1e-4;
  double discount = 1.0;
  std::size_t sync_period = 10;  // gradient steps between target syncs
  double explore_start = 0.9;
  double explore_end = 0.05;
  double explore_fraction = 0.8;  // share of total meta-steps spent decaying
  std::size_t buffer_capacity = 4096;
  std::size_t batch_size = 64;

  void validate() const {
    if (max_epoch == 0) throw ConfigError("epochs must be >= 1");
    if (!(lr_end > 0.0 && lr_end <= lr_start)) throw ConfigError("learning rates need 0 < lr_end <= lr_start");
    if (sync_period == 0) throw ConfigError("sync_period must be >= 1");
    if (!(discount >= 0.0 && discount <= 1.0)) throw ConfigError("discount must lie in [0, 1]");
    if (!(explore_start >= 0.0 && explore_start <= 1.0 && explore_end >= 0.0 && explore_end <= 1.0)) {
      throw ConfigError("explore rates must lie in [0, 1]");
    }
    if (!(explore_fraction > 0.0 && explore_fraction <= 1.0)) throw ConfigError("explore_fraction must lie in (0, 1]");
    if (batch_size == 0 || buffer_capacity < batch_size) throw ConfigError("buffer capacity must cover one batch");
  }
};

inline double cosine_lr(double epoch, const TrainConfig& cfg) {
  if (!(epoch >= 0.0 && epoch <= static_cast<double>(cfg.max_epoch))) throw ContractError("epoch outside schedule");
  const double phase = std::numbers::pi * epoch / static_cast<double>(cfg.max_epoch);
  return cfg.lr_end + 0.5 * (cfg.lr_start - cfg.lr_end) * (1.0 + std::cos(phase));
}

// Linear decay over the first explore_fraction of all meta-steps.
inline double explore_rate(std::size_t step, std::size_t total_steps, const TrainConfig& cfg) {
  const double horizon = cfg.explore_fraction * static_cast<double>(total_steps);
  if (horizon <= 0.0 || static_cast<double>(step) >= horizon) return cfg.explore_end;
  const double t = static_cast<double>(step) / horizon;
  return cfg.explore_start + (cfg.explore_end - cfg.explore_start) * t;
}

// Lowest index wins ties.
inline std::size_t argmax(std::span<const double> q) {
  if (q.empty()) throw ContractError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < q.size(); ++i) {
    if (q[i] > q[best]) best = i;
  }
  return best;
}

inline std::size_t act_eps_greedy(std::span<const double> q, double explore, Rng& rng) {
  if (!(explore >= 0.0 && explore <= 1.0)) throw ContractError("explore rate must lie in [0, 1]");
  if (explore > 0.0 && rng.uniform() < explore) return rng.index(q.size());
  return argmax(q);
}

// Double DQN: the online network picks the next action, the target network
// values it. Terminal transitions do not bootstrap.
inline double td_target(const Transition& tr, const NetworkParams& online, const NetworkParams& target,
                        double discount) {
  if (tr.terminal || discount == 0.0) return tr.reward;
  const std::size_t next_action = argmax(forward(online, tr.next));
  return tr.reward + discount * forward(target, tr.next)[next_action];
}

inline LossAndGrad td_loss_and_grad(std::span<const Transition> batch, const NetworkParams& online,
                                    const NetworkParams& target, double discount) {
  std::vector<QSample> samples;
  samples.reserve(batch.size());
  for (const auto& tr : batch) samples.push_back({tr.s, tr.action, td_target(tr, online, target, discount)});
  return loss_and_grad(online, samples);
}

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ContractError("replay capacity must be positive");
    items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
  }

  void push(const Transition& tr) {
    if (items_.size() < capacity_) {
      items_.push_back(tr);
    } else {
      items_[cursor_] = tr;
    }
    cursor_ = (cursor_ + 1) % capacity_;
  }

  // Distinct entries within one batch (partial Fisher-Yates).
  std::vector<Transition> sample(std::size_t n, Rng& rng) const {
    if (n > items_.size()) throw ContractError("batch larger than the replay buffer");
    std::vector<std::size_t> idx(items_.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<Transition> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = i + rng.index(idx.size() - i);
      std::swap(idx[i], idx[j]);
      out.push_back(items_[idx[i]]);
    }
    return out;
  }

  std::size_t size() const noexcept { return items_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::vector<Transition> items_;
};

class DqnAgent {
 public:
  DqnAgent(NetworkShape shape, const TrainConfig& cfg, std::uint64_t seed)
      : cfg_(cfg), rng_(mix_seed(seed, hash_name("agent-stream"))), buffer_(cfg.buffer_capacity) {
    Rng init(mix_seed(seed, hash_name("agent-init")));
    online_ = NetworkParams::glorot(shape, init);
    target_ = online_;
  }

  std::size_t act(const StateVector& s, double explore) { return act_eps_greedy(forward(online_, s), explore, rng_); }

  // Stores the transition and takes one gradient step once a batch is
  // available. Returns the batch loss, or a negative value when no step ran.
  double observe(const Transition& tr, double lr) {
    buffer_.push(tr);
    if (buffer_.size() < cfg_.batch_size) return -1.0;
    const auto batch = buffer_.sample(cfg_.batch_size, rng_);
    LossAndGrad lg = td_loss_and_grad(batch, online_, target_, cfg_.discount);
    sgd_step(online_, lg.grad, lr);
    ++grad_steps_;
    if (grad_steps_ % cfg_.sync_period == 0) sync_target();
    return lg.loss;
  }

  void sync_target() { target_ = online_; }

  const NetworkParams& online() const noexcept { return online_; }
  const NetworkParams& target() const noexcept { return target_; }
  std::size_t grad_steps() const noexcept { return grad_steps_; }
  const ReplayBuffer& buffer() const noexcept { return buffer_; }

 private:
  TrainConfig cfg_;
  Rng rng_;
  ReplayBuffer buffer_;
  NetworkParams online_;
  NetworkParams target_;
  std::size_t grad_steps_ = 0;
};

// Fresh network with the same initialization an agent built from `seed` uses.
inline NetworkParams initial_network(NetworkShape shape, std::uint64_t seed) {
  Rng init(mix_seed(seed, hash_name("agent-init")));
  return NetworkParams::glorot(shape, init);
}

}  // namespace rleceo
