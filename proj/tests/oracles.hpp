#pragma once

// Independent reference computations used only by the tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "fdrl/nn.hpp"
#include "fdrl/random.hpp"
#include "fdrl/tensor.hpp"

namespace oracle {

// sum_{m < terms} (-1)^m (x/2)^{2m} / (m!)^2
inline double j0_series(double x, int terms = 10) {
  double sum = 0.0;
  for (int m = 0; m < terms; ++m) {
    double term = 1.0;
    for (int i = 1; i <= m; ++i) term *= (x / 2.0) * (x / 2.0) / (static_cast<double>(i) * i);
    sum += (m % 2 == 0 ? term : -term);
  }
  return sum;
}

// Naive triple loop over intra-cell and inter-cell interference.
inline double naive_sinr(const fdrl::GainTensor& g, const fdrl::PowerAllocation& p, double noise,
                         std::size_t n, std::size_t k) {
  const auto& users = p.layout();
  double intra = 0.0;
  for (std::size_t kk = 0; kk < users.users_in(n); ++kk) {
    if (kk != k) intra += g(n, n, k) * p(n, kk);
  }
  double inter = 0.0;
  for (std::size_t nn = 0; nn < users.n_cells(); ++nn) {
    if (nn == n) continue;
    for (std::size_t j = 0; j < users.users_in(nn); ++j) inter += g(nn, n, k) * p(nn, j);
  }
  return p(n, k) * g(n, n, k) / (intra + inter + noise);
}

// Kolmogorov asymptotic p-value for a one-sample KS statistic.
inline double ks_p_value(double d, std::size_t n) {
  const double lambda = (std::sqrt(static_cast<double>(n)) + 0.12 +
                         0.11 / std::sqrt(static_cast<double>(n))) * d;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    sum += (j % 2 == 1 ? 2.0 : -2.0) * std::exp(-2.0 * j * j * lambda * lambda);
  }
  return std::min(1.0, std::max(0.0, sum));
}

// Central finite difference of f over each coordinate of params.
template <class F>
std::vector<double> finite_difference(std::vector<double> params, F&& f, double step = 1e-5) {
  std::vector<double> grad(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + step;
    const double up = f(params);
    params[i] = saved - step;
    const double down = f(params);
    params[i] = saved;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

// Random network with nonzero biases. Zero biases behind a fully inactive
// layer put the next pre-activations exactly on the rectifier kink, where the
// derivative is undefined and finite differences disagree with any subgradient.
inline fdrl::Mlp random_mlp(const std::vector<std::size_t>& dims, fdrl::RandomStream& rng) {
  fdrl::Mlp net = fdrl::init_weights(dims, rng);
  const fdrl::WeightLayout& l = net.layout();
  for (std::size_t layer = 0; layer < l.n_layers(); ++layer) {
    for (std::size_t i = 0; i < dims[layer + 1]; ++i) net.params()[l.bias_offset(layer) + i] = rng.uniform(-0.5, 0.5);
  }
  return net;
}

// Largest elementwise |a - b| / max(|a|, |b|, floor); the floor keeps entries
// that are zero in both (e.g. dead rectifier units) from dividing by zero.
inline double max_relative_error(const std::vector<double>& a, const std::vector<double>& b,
                                 double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return a.size() == b.size() ? worst : INFINITY;
}

}  // namespace oracle
