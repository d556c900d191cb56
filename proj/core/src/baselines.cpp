#include "fdrl/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "fdrl/error.hpp"

namespace fdrl {

PowerAllocation max_power(const UserLayout& users, double p_max) {
  return PowerAllocation(users, p_max);
}

std::vector<std::vector<double>> link_coupling(const GainTensor& g) {
  const UserLayout& users = g.layout();
  const std::size_t links = users.total_users();
  std::vector<std::vector<double>> coupling(links, std::vector<double>(links, 0.0));
  for (std::size_t n = 0; n < users.n_cells(); ++n) {
    for (std::size_t k = 0; k < users.users_in(n); ++k) {
      const std::size_t l = users.flat(n, k);
      for (std::size_t m = 0; m < links; ++m) coupling[l][m] = g(users.cell_of(m), n, k);
    }
  }
  return coupling;
}

namespace {

constexpr double kMaxWeight = 1e12;

double sum_rate_of_power(const std::vector<std::vector<double>>& coupling,
                         const std::vector<double>& p, double noise) {
  double total = 0.0;
  for (std::size_t l = 0; l < p.size(); ++l) {
    double interference = noise;
    for (std::size_t m = 0; m < p.size(); ++m) {
      if (m != l) interference += coupling[l][m] * p[m];
    }
    total += std::log2(1.0 + coupling[l][l] * p[l] / interference);
  }
  return total;
}

double sum_rate_of(const std::vector<std::vector<double>>& coupling, const std::vector<double>& v,
                   double noise) {
  std::vector<double> p(v.size());
  for (std::size_t l = 0; l < v.size(); ++l) p[l] = v[l] * v[l];
  return sum_rate_of_power(coupling, p, noise);
}

PowerAllocation to_power(const UserLayout& users, const std::vector<double>& v, double p_max) {
  PowerAllocation p(users);
  for (std::size_t l = 0; l < v.size(); ++l) p.flat()[l] = std::clamp(v[l] * v[l], 0.0, p_max);
  return p;
}

}  // namespace

std::vector<double> wmmse_iteration(const std::vector<std::vector<double>>& coupling,
                                    const std::vector<double>& v, double p_max, double noise) {
  const std::size_t links = v.size();
  const double v_max = std::sqrt(p_max);
  std::vector<double> u(links);
  std::vector<double> w(links);
  for (std::size_t l = 0; l < links; ++l) {
    double received = noise;
    for (std::size_t m = 0; m < links; ++m) received += coupling[l][m] * v[m] * v[m];
    const double a_ll = std::sqrt(coupling[l][l]);
    u[l] = a_ll * v[l] / received;
    const double mse = 1.0 - u[l] * a_ll * v[l];
    w[l] = mse < 1.0 / kMaxWeight ? kMaxWeight : 1.0 / mse;
  }
  std::vector<double> next(links);
  for (std::size_t l = 0; l < links; ++l) {
    double denom = 0.0;
    for (std::size_t m = 0; m < links; ++m) denom += w[m] * u[m] * u[m] * coupling[m][l];
    const double numer = w[l] * u[l] * std::sqrt(coupling[l][l]);
    next[l] = denom > 0.0 ? std::clamp(numer / denom, 0.0, v_max) : 0.0;
  }
  return next;
}

WmmseResult wmmse(const GainTensor& g, double p_max, double noise, const WmmseOptions& options) {
  if (!(options.tol > 0.0)) throw DomainError("wmmse: tol must be > 0");
  if (!(noise > 0.0)) throw DomainError("wmmse: noise must be > 0");
  const auto coupling = link_coupling(g);
  const std::size_t links = coupling.size();
  std::vector<double> v(links, std::sqrt(p_max));

  WmmseResult result;
  result.sum_rate_trace.push_back(sum_rate_of(coupling, v, noise));
  std::vector<double> best = v;
  double best_rate = result.sum_rate_trace.back();
  while (result.iterations < options.max_iter) {
    std::vector<double> next = wmmse_iteration(coupling, v, p_max, noise);
    double change = 0.0;
    for (std::size_t l = 0; l < links; ++l) change = std::max(change, std::abs(next[l] - v[l]));
    v = std::move(next);
    ++result.iterations;
    result.sum_rate_trace.push_back(sum_rate_of(coupling, v, noise));
    if (result.sum_rate_trace.back() >= best_rate) {
      best_rate = result.sum_rate_trace.back();
      best = v;
    }
    if (change < options.tol) {
      result.converged = true;
      break;
    }
  }
  result.power = to_power(g.layout(), result.converged ? v : best, p_max);
  return result;
}

BruteForceResult brute_force_power(const GainTensor& g, double noise, double p_max,
                                   std::size_t grid_points) {
  const UserLayout& users = g.layout();
  const std::size_t links = users.total_users();
  if (links > 4) throw UsageError("brute_force_power: at most 4 links");
  if (grid_points < 2) throw UsageError("brute_force_power: need at least 2 grid points");
  std::vector<double> levels(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) {
    levels[i] = p_max * static_cast<double>(i) / static_cast<double>(grid_points - 1);
  }

  if (!(noise > 0.0)) throw DomainError("brute_force_power: noise must be > 0");
  const auto coupling = link_coupling(g);
  std::vector<std::size_t> idx(links, 0);
  std::vector<double> p(links, 0.0);
  std::vector<double> best_p = p;
  double best_rate = sum_rate_of_power(coupling, p, noise);
  while (true) {
    // Odometer in lexicographic order, last link fastest.
    std::size_t pos = links;
    while (pos > 0 && idx[pos - 1] + 1 == grid_points) idx[--pos] = 0;
    if (pos == 0) break;
    ++idx[pos - 1];
    for (std::size_t l = 0; l < links; ++l) p[l] = levels[idx[l]];
    const double value = sum_rate_of_power(coupling, p, noise);
    if (value > best_rate) {
      best_rate = value;
      best_p = p;
    }
  }
  PowerAllocation power(users);
  std::copy(best_p.begin(), best_p.end(), power.flat().begin());
  return {std::move(power), best_rate};
}

}  // namespace fdrl
