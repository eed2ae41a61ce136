#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "rleceo/error.hpp"
#include "rleceo/random.hpp"

namespace rleceo {

inline constexpr double kSeluAlpha = 1.6732632423543772;
inline constexpr double kSeluScale = 1.0507009873554805;

inline double selu(double z) noexcept { return z > 0.0 ? kSeluScale * z : kSeluScale * kSeluAlpha * std::expm1(z); }

inline double selu_grad(double z) noexcept { return z > 0.0 ? kSeluScale : kSeluScale * kSeluAlpha * std::exp(z); }

// Kept strictly inside (0, 1) even where the double result would round to an
// endpoint (|z| beyond about 37 on the upper side).
inline double sigmoid(double z) noexcept {
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2;
  if (z >= 0.0) return std::min(1.0 / (1.0 + std::exp(-z)), hi);
  const double e = std::exp(z);
  return std::max(e / (1.0 + e), lo);
}

struct NetworkShape {
  std::size_t inputs = 10;
  std::size_t hidden = 64;
  std::size_t outputs = 11;

  std::size_t parameter_count() const noexcept { return hidden * inputs + hidden + outputs * hidden + outputs; }
  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

// q = sigmoid(W2 selu(W1 s + b1) + b2), parameters stored flat as
// [W1 row-major | b1 | W2 row-major | b2].
class NetworkParams {
 public:
  NetworkParams() = default;

  explicit NetworkParams(NetworkShape shape) : shape_(shape), data_(shape.parameter_count(), 0.0) {
    if (shape.inputs == 0 || shape.hidden == 0 || shape.outputs == 0) throw ContractError("network layers must be non-empty");
  }

  // Uniform in +-sqrt(6 / (fan_in + fan_out)) per layer, zero biases.
  static NetworkParams glorot(NetworkShape shape, Rng& rng) {
    NetworkParams p(shape);
    const double l1 = std::sqrt(6.0 / static_cast<double>(shape.inputs + shape.hidden));
    const double l2 = std::sqrt(6.0 / static_cast<double>(shape.hidden + shape.outputs));
    for (double& w : p.w1()) w = rng.uniform(-l1, l1);
    for (double& w : p.w2()) w = rng.uniform(-l2, l2);
    return p;
  }

  const NetworkShape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  std::span<double> w1() noexcept { return data().subspan(0, shape_.hidden * shape_.inputs); }
  std::span<double> b1() noexcept { return data().subspan(b1_offset(), shape_.hidden); }
  std::span<double> w2() noexcept { return data().subspan(w2_offset(), shape_.outputs * shape_.hidden); }
  std::span<double> b2() noexcept { return data().subspan(b2_offset(), shape_.outputs); }
  std::span<const double> w1() const noexcept { return data().subspan(0, shape_.hidden * shape_.inputs); }
  std::span<const double> b1() const noexcept { return data().subspan(b1_offset(), shape_.hidden); }
  std::span<const double> w2() const noexcept { return data().subspan(w2_offset(), shape_.outputs * shape_.hidden); }
  std::span<const double> b2() const noexcept { return data().subspan(b2_offset(), shape_.outputs); }

  friend bool operator==(const NetworkParams&, const NetworkParams&) = default;

 private:
  std::size_t b1_offset() const noexcept { return shape_.hidden * shape_.inputs; }
  std::size_t w2_offset() const noexcept { return b1_offset() + shape_.hidden; }
  std::size_t b2_offset() const noexcept { return w2_offset() + shape_.outputs * shape_.hidden; }

  NetworkShape shape_;
  std::vector<double> data_;
};

struct ForwardPass {
  std::vector<double> pre_hidden;  // W1 s + b1
  std::vector<double> hidden;      // selu(pre_hidden)
  std::vector<double> q;           // sigmoid(W2 hidden + b2)
};

inline ForwardPass forward_pass(const NetworkParams& net, std::span<const double> s) {
  const auto& shape = net.shape();
  if (s.size() != shape.inputs) throw ContractError("state has the wrong length for this network");
  for (double v : s) {
    if (!std::isfinite(v)) throw ContractError("non-finite network input");
  }
  ForwardPass fp;
  fp.pre_hidden.resize(shape.hidden);
  fp.hidden.resize(shape.hidden);
  fp.q.resize(shape.outputs);
  const auto w1 = net.w1();
  const auto b1 = net.b1();
  for (std::size_t h = 0; h < shape.hidden; ++h) {
    double z = b1[h];
    for (std::size_t i = 0; i < shape.inputs; ++i) z += w1[h * shape.inputs + i] * s[i];
    fp.pre_hidden[h] = z;
    fp.hidden[h] = selu(z);
  }
  const auto w2 = net.w2();
  const auto b2 = net.b2();
  for (std::size_t o = 0; o < shape.outputs; ++o) {
    double z = b2[o];
    for (std::size_t h = 0; h < shape.hidden; ++h) z += w2[o * shape.hidden + h] * fp.hidden[h];
    fp.q[o] = sigmoid(z);
  }
  return fp;
}

inline std::vector<double> forward(const NetworkParams& net, std::span<const double> s) {
  return forward_pass(net, s).q;
}

// Regression target for one taken action.
struct QSample {
  std::span<const double> state;
  std::size_t action = 0;
  double target = 0.0;
};

struct LossAndGrad {
  double loss = 0.0;
  NetworkParams grad;
};

// Mean squared TD error over the batch; only the taken action's output
// carries gradient, and targets are constants.
inline LossAndGrad loss_and_grad(const NetworkParams& net, std::span<const QSample> batch) {
  if (batch.empty()) throw ContractError("loss over an empty batch");
  const auto& shape = net.shape();
  LossAndGrad out{0.0, NetworkParams(shape)};
  auto gw1 = out.grad.w1();
  auto gb1 = out.grad.b1();
  auto gw2 = out.grad.w2();
  auto gb2 = out.grad.b2();
  const auto w2 = net.w2();
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  std::vector<double> dpre(shape.hidden);

  for (const auto& sample : batch) {
    if (sample.action >= shape.outputs) throw ContractError("action index out of range");
    const ForwardPass fp = forward_pass(net, sample.state);
    const std::size_t a = sample.action;
    const double qa = fp.q[a];
    const double err = qa - sample.target;
    out.loss += err * err * inv_n;

    // d loss / d z2_a through the sigmoid.
    const double dz2 = 2.0 * err * inv_n * qa * (1.0 - qa);
    gb2[a] += dz2;
    for (std::size_t h = 0; h < shape.hidden; ++h) {
      gw2[a * shape.hidden + h] += dz2 * fp.hidden[h];
      dpre[h] = dz2 * w2[a * shape.hidden + h] * selu_grad(fp.pre_hidden[h]);
    }
    for (std::size_t h = 0; h < shape.hidden; ++h) {
      gb1[h] += dpre[h];
      for (std::size_t i = 0; i < shape.inputs; ++i) gw1[h * shape.inputs + i] += dpre[h] * sample.state[i];
    }
  }
  return out;
}

inline void sgd_step(NetworkParams& net, const NetworkParams& grad, double lr) {
  if (!(lr > 0.0)) throw ContractError("learning rate must be positive");
  if (!(net.shape() == grad.shape())) throw ContractError("gradient shape mismatch");
  auto p = net.data();
  const auto g = grad.data();
  for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * g[i];
}

}  // namespace rleceo
