#pragma once

#include <cstddef>
#include <vector>

#include "fdrl/tensor.hpp"

namespace fdrl {

PowerAllocation max_power(const UserLayout& users, double p_max);

// Links flattened as l = flat(n, k). coupling[l][m] is the gain from the
// transmitter of link m to the receiver of link l, following the netsim SINR
// convention (same-cell interference uses the receiver's own direct gain).
std::vector<std::vector<double>> link_coupling(const GainTensor& g);

struct WmmseOptions {
  double tol = 1e-5;  // max amplitude change, sqrt(W)
  std::size_t max_iter = 500;
};

struct WmmseResult {
  PowerAllocation power;
  std::vector<double> sum_rate_trace;  // index 0 is the max-power start
  std::size_t iterations = 0;
  bool converged = false;
};

// Scalar WMMSE with unit rate weights.
WmmseResult wmmse(const GainTensor& g, double p_max, double noise, const WmmseOptions& options = {});

// One WMMSE sweep (u, w, v updates) on link amplitudes v.
std::vector<double> wmmse_iteration(const std::vector<std::vector<double>>& coupling,
                                    const std::vector<double>& v, double p_max, double noise);

struct BruteForceResult {
  PowerAllocation power;
  double sum_rate = 0.0;
};

// Exhaustive search over grid_points uniform levels in [0, P_max] per link.
// At most four links. Ties keep the lexicographically smallest allocation.
BruteForceResult brute_force_power(const GainTensor& g, double noise, double p_max,
                                   std::size_t grid_points);

}  // namespace fdrl
