#include "fdrl/nn.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "fdrl/error.hpp"

namespace fdrl {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(std::span<const std::uint8_t> in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[i]) << (8 * i);
  return v;
}

}  // namespace

WeightLayout::WeightLayout(std::vector<std::size_t> layer_dims) : dims_(std::move(layer_dims)) {
  if (dims_.size() < 2) throw UsageError("WeightLayout needs at least input and output dims");
  for (std::size_t d : dims_) {
    if (d == 0) throw UsageError("WeightLayout: zero-width layer");
  }
  offsets_.push_back(0);
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    offsets_.push_back(offsets_.back() + (dims_[l] + 1) * dims_[l + 1]);
  }
}

std::uint64_t WeightLayout::hash() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  };
  mix(dims_.size());
  for (std::size_t d : dims_) mix(d);
  return h;
}

std::vector<std::uint8_t> serialize(const WeightVector& weights) {
  if (weights.values.size() != weights.layout.size()) {
    throw UsageError("serialize: values do not match layout");
  }
  std::vector<std::uint8_t> out;
  out.reserve(8 * (weights.values.size() + 1));
  put_u64(out, weights.layout.hash());
  for (double v : weights.values) put_u64(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

WeightVector deserialize(std::span<const std::uint8_t> bytes, const WeightLayout& expected) {
  if (bytes.size() != 8 * (expected.size() + 1)) {
    throw UsageError("deserialize: payload length does not match layout");
  }
  if (get_u64(bytes.first(8)) != expected.hash()) {
    throw UsageError("deserialize: layout hash mismatch");
  }
  WeightVector out{expected, std::vector<double>(expected.size())};
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = std::bit_cast<double>(get_u64(bytes.subspan(8 * (i + 1), 8)));
    if (!std::isfinite(out.values[i])) throw UsageError("deserialize: non-finite parameter");
  }
  return out;
}

Mlp::Mlp(WeightLayout layout) : layout_(std::move(layout)), params_(layout_.size(), 0.0) {}

Mlp::Mlp(WeightLayout layout, std::vector<double> params)
    : layout_(std::move(layout)), params_(std::move(params)) {
  if (params_.size() != layout_.size()) throw UsageError("Mlp: parameter count mismatch");
}

void Mlp::restore(const WeightVector& weights) {
  if (!(weights.layout == layout_) || weights.values.size() != params_.size()) {
    throw UsageError("Mlp::restore: layout mismatch");
  }
  params_ = weights.values;
}

Mlp::Trace Mlp::run(std::span<const double> x) const {
  if (x.size() != input_dim()) throw UsageError("Mlp: input dimension mismatch");
  const auto& dims = layout_.dims();
  Trace trace;
  trace.activations.reserve(dims.size());
  trace.activations.emplace_back(x.begin(), x.end());
  for (std::size_t l = 0; l < layout_.n_layers(); ++l) {
    const ConstMatrixMap w(params_.data() + layout_.weight_offset(l),
                           static_cast<Eigen::Index>(dims[l + 1]),
                           static_cast<Eigen::Index>(dims[l]));
    const ConstVectorMap b(params_.data() + layout_.bias_offset(l),
                           static_cast<Eigen::Index>(dims[l + 1]));
    const auto& in = trace.activations.back();
    std::vector<double> out(dims[l + 1]);
    VectorMap y(out.data(), static_cast<Eigen::Index>(out.size()));
    y.noalias() = w * ConstVectorMap(in.data(), static_cast<Eigen::Index>(in.size())) + b;
    if (l + 1 < layout_.n_layers()) y = y.cwiseMax(0.0);
    trace.activations.push_back(std::move(out));
  }
  return trace;
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
  return std::move(run(x).activations.back());
}

void Mlp::backward(std::span<const double> x, std::span<const double> logit_grad,
                   std::span<double> grad, double scale) const {
  if (logit_grad.size() != output_dim()) throw UsageError("Mlp::backward: logit gradient size");
  if (grad.size() != params_.size()) throw UsageError("Mlp::backward: gradient size");
  const Trace trace = run(x);
  const auto& dims = layout_.dims();

  Eigen::VectorXd delta =
      ConstVectorMap(logit_grad.data(), static_cast<Eigen::Index>(logit_grad.size())) * scale;
  for (std::size_t l = layout_.n_layers(); l-- > 0;) {
    const auto rows = static_cast<Eigen::Index>(dims[l + 1]);
    const auto cols = static_cast<Eigen::Index>(dims[l]);
    const auto& in = trace.activations[l];
    const ConstVectorMap a(in.data(), cols);
    MatrixMap gw(grad.data() + layout_.weight_offset(l), rows, cols);
    VectorMap gb(grad.data() + layout_.bias_offset(l), rows);
    gw.noalias() += delta * a.transpose();
    gb += delta;
    if (l == 0) break;
    const ConstMatrixMap w(params_.data() + layout_.weight_offset(l), rows, cols);
    Eigen::VectorXd back = w.transpose() * delta;
    // Rectifier derivative: active units have positive output.
    for (Eigen::Index i = 0; i < cols; ++i) {
      if (!(a[i] > 0.0)) back[i] = 0.0;
    }
    delta = std::move(back);
  }
}

Mlp init_weights(const std::vector<std::size_t>& layer_dims, RandomStream& rng) {
  Mlp net{WeightLayout(layer_dims)};
  const auto& layout = net.layout();
  auto params = net.params();
  for (std::size_t l = 0; l < layout.n_layers(); ++l) {
    const double bound = std::sqrt(6.0 / static_cast<double>(layer_dims[l]));
    const std::size_t begin = layout.weight_offset(l);
    const std::size_t end = layout.bias_offset(l);
    for (std::size_t i = begin; i < end; ++i) params[i] = rng.uniform(-bound, bound);
  }
  return net;
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) return {};
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(logits[i] - top);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

LossGradient grad_td_loss(const Mlp& net, std::span<const double> state, std::size_t action,
                          double target) {
  if (action >= net.output_dim()) throw UsageError("grad_td_loss: action out of range");
  const std::vector<double> q = net.forward(state);
  const double err = target - q[action];
  LossGradient out{std::vector<double>(net.n_params(), 0.0), err * err};
  std::vector<double> dq(q.size(), 0.0);
  dq[action] = -2.0 * err;
  net.backward(state, dq, out.grad);
  return out;
}

LossGradient grad_log_policy(const Mlp& net, std::span<const double> state, std::size_t action) {
  if (action >= net.output_dim()) throw UsageError("grad_log_policy: action out of range");
  const std::vector<double> logits = net.forward(state);
  const std::vector<double> p = softmax(logits);
  // log-sum-exp form stays finite when p[action] underflows.
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double z : logits) total += std::exp(z - top);
  LossGradient out{std::vector<double>(net.n_params(), 0.0),
                   logits[action] - top - std::log(total)};
  std::vector<double> dlogits(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) dlogits[i] = (i == action ? 1.0 : 0.0) - p[i];
  net.backward(state, dlogits, out.grad);
  return out;
}

void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state) {
  if (params.size() != grad.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw UsageError("adam_step: length mismatch");
  }
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grad[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / correction1;
    const double v_hat = state.v[i] / correction2;
    params[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

}  // namespace fdrl
