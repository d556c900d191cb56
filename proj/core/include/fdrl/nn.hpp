#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fdrl/random.hpp"

namespace fdrl {

// Binds positions of a flat parameter vector to layers. Layer l owns a
// row-major weight block (dims[l+1] x dims[l]) followed by dims[l+1] biases.
class WeightLayout {
 public:
  WeightLayout() = default;
  explicit WeightLayout(std::vector<std::size_t> layer_dims);

  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t n_layers() const noexcept { return dims_.empty() ? 0 : dims_.size() - 1; }
  std::size_t size() const noexcept { return offsets_.empty() ? 0 : offsets_.back(); }
  std::size_t weight_offset(std::size_t layer) const { return offsets_.at(layer); }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_.at(layer) + dims_.at(layer + 1) * dims_.at(layer);
  }
  // FNV-1a over the dimension list.
  std::uint64_t hash() const noexcept;

  bool operator==(const WeightLayout&) const = default;

 private:
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> offsets_;
};

struct WeightVector {
  WeightLayout layout;
  std::vector<double> values;

  bool operator==(const WeightVector&) const = default;
};

// Wire format: layout hash (u64) then values (f64), both little-endian.
std::vector<std::uint8_t> serialize(const WeightVector& weights);
// Throws UsageError if the hash or length disagrees with `expected`, or a
// value is not finite.
WeightVector deserialize(std::span<const std::uint8_t> bytes, const WeightLayout& expected);

// Fully connected network, rectifier on hidden layers, identity output.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(WeightLayout layout);  // all-zero parameters
  Mlp(WeightLayout layout, std::vector<double> params);

  const WeightLayout& layout() const noexcept { return layout_; }
  std::size_t input_dim() const { return layout_.dims().front(); }
  std::size_t output_dim() const { return layout_.dims().back(); }
  std::size_t n_params() const noexcept { return params_.size(); }

  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }

  WeightVector flatten() const { return {layout_, params_}; }
  void restore(const WeightVector& weights);

  std::vector<double> forward(std::span<const double> x) const;

  // Backpropagates d(objective)/d(logits) through the network evaluated at x,
  // accumulating scale * d(objective)/d(params) into grad.
  void backward(std::span<const double> x, std::span<const double> logit_grad,
                std::span<double> grad, double scale = 1.0) const;

  bool operator==(const Mlp&) const = default;

 private:
  struct Trace {
    std::vector<std::vector<double>> activations;  // input, hidden..., logits
  };
  Trace run(std::span<const double> x) const;

  WeightLayout layout_;
  std::vector<double> params_;
};

Mlp init_weights(const std::vector<std::size_t>& layer_dims, RandomStream& rng);

std::vector<double> softmax(std::span<const double> logits);

struct LossGradient {
  std::vector<double> grad;
  double value = 0.0;
};

// (target - Q(s, a))^2 with the target held constant.
LossGradient grad_td_loss(const Mlp& net, std::span<const double> state, std::size_t action,
                          double target);

// Gradient of log softmax(forward(s))[a]; value is the log-probability.
LossGradient grad_log_policy(const Mlp& net, std::span<const double> state, std::size_t action);

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;

  AdamState() = default;
  AdamState(std::size_t n, double learning_rate) : lr(learning_rate), m(n, 0.0), v(n, 0.0) {}
};

// Bias-corrected Adam descent step.
void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state);

}  // namespace fdrl
