#include "fdrl/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fdrl/error.hpp"

namespace fdrl {

double dbm_to_watts(double dbm) noexcept { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double action_to_power(int level_index, std::size_t n_levels, double p_max) {
  if (n_levels < 2) throw DomainError("action_to_power: need at least two power levels");
  if (level_index < 0 || static_cast<std::size_t>(level_index) >= n_levels) {
    throw DomainError("action_to_power: level index out of range");
  }
  if (static_cast<std::size_t>(level_index) == n_levels - 1) return p_max;
  return static_cast<double>(level_index) * p_max / static_cast<double>(n_levels - 1);
}

double sinr(const GainTensor& g, const PowerAllocation& p, double noise, std::size_t n,
            std::size_t k) {
  if (!(noise > 0.0)) throw DomainError("sinr: noise power must be > 0");
  const std::size_t n_cells = g.n_cells();
  const double direct = g(n, n, k);
  const auto own_cell = p.cell(n);

  double intra = 0.0;
  for (std::size_t k2 = 0; k2 < own_cell.size(); ++k2) {
    if (k2 != k) intra += direct * own_cell[k2];
  }
  double inter = 0.0;
  for (std::size_t n2 = 0; n2 < n_cells; ++n2) {
    if (n2 == n) continue;
    const auto powers = p.cell(n2);
    inter += g(n2, n, k) * std::accumulate(powers.begin(), powers.end(), 0.0);
  }
  return p(n, k) * direct / (intra + inter + noise);
}

RateMatrix rates(const GainTensor& g, const PowerAllocation& p, double noise) {
  const UserLayout& layout = p.layout();
  RateMatrix c(layout);
  for (std::size_t n = 0; n < layout.n_cells(); ++n) {
    for (std::size_t k = 0; k < layout.users_in(n); ++k) {
      c(n, k) = std::log2(1.0 + sinr(g, p, noise, n, k));
    }
  }
  return c;
}

double network_sum_rate(const RateMatrix& rates) {
  const auto values = rates.flat();
  return std::accumulate(values.begin(), values.end(), 0.0);
}

double reward(std::size_t n, const RateMatrix& rates, double beta,
              std::span<const std::size_t> neighbors) {
  if (!(beta >= 0.0)) throw DomainError("reward: beta must be >= 0");
  auto cell_rate = [&](std::size_t j) {
    const auto c = rates.cell(j);
    return std::accumulate(c.begin(), c.end(), 0.0);
  };
  double neighborhood = 0.0;
  for (std::size_t m : neighbors) neighborhood += cell_rate(m);
  return cell_rate(n) + beta * neighborhood;
}

namespace {

double gain_feature(double g, const NormStats& norm) {
  const double db = 10.0 * std::log10(std::max(g, 1e-20));
  return std::clamp((db - norm.gain_mean_db) / norm.gain_scale_db, -norm.clip, norm.clip);
}

}  // namespace

Observation build_observation(std::size_t n, std::size_t k, const GainTensor& g,
                              std::span<const std::size_t> neighbors, std::size_t neighbor_count,
                              const PowerAllocation& prev_p, const RateMatrix& prev_rates,
                              const NormStats& norm) {
  if (neighbors.size() > neighbor_count) throw UsageError("build_observation: too many neighbors");
  Observation obs(observation_dim(neighbor_count), 0.0);
  obs[0] = gain_feature(g(n, n, k), norm);
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    obs[1 + i] = gain_feature(g(neighbors[i], n, k), norm);
  }
  obs[1 + neighbor_count] = prev_p(n, k) / norm.p_max;
  obs[2 + neighbor_count] = prev_rates(n, k) / norm.rate_scale;
  return obs;
}

Environment::Environment(TopologyConfig topology, EnvConfig env, std::uint64_t seed)
    : topology_config_(topology),
      config_(env),
      p_max_(dbm_to_watts(env.p_max_dbm)),
      noise_(dbm_to_watts(env.noise_dbm)),
      rng_(seed) {
  if (config_.n_power_levels < 2) throw DomainError("Environment: need M >= 2 power levels");
  if (config_.horizon < 1) throw DomainError("Environment: horizon must be >= 1");
  if (!(config_.beta >= 0.0)) throw DomainError("Environment: beta must be >= 0");
  norm_.p_max = p_max_;
  // BS geometry is fixed; users are placed by reset().
  topology_.grid_side = topology_config_.grid_side;
  topology_.inter_site_distance = topology_config_.inter_site_distance_m;
  topology_.bs_positions = bs_grid(topology_config_.grid_side, topology_config_.inter_site_distance_m);
  topology_.users = UserLayout(topology_.bs_positions.size(), topology_config_.users_per_cell);
  topology_.neighbor_sets = neighbor_sets(topology_.bs_positions, topology_config_.neighbor_count);
  channel_.rho = jakes_rho(topology_config_.doppler_hz, topology_config_.slot_duration_s);
}

UserTensor<Observation> Environment::observe(const GainTensor& g, const PowerAllocation& prev_p,
                                             const RateMatrix& prev_rates) const {
  UserTensor<Observation> out(topology_.users);
  for (std::size_t n = 0; n < n_cells(); ++n) {
    for (std::size_t k = 0; k < topology_.users.users_in(n); ++k) {
      out(n, k) = build_observation(n, k, g, topology_.neighbor_sets[n],
                                    topology_config_.neighbor_count, prev_p, prev_rates, norm_);
    }
  }
  return out;
}

UserTensor<Observation> Environment::reset() {
  topology_ = build_topology(topology_config_, rng_);
  channel_.alpha = large_scale_gains(topology_, topology_config_.shadowing_sigma_db,
                                     topology_config_.d_min_m, rng_);
  channel_.h = init_fading(topology_, rng_);
  slot_ = 0;
  started_ = true;
  const PowerAllocation zero_p(topology_.users, 0.0);
  const RateMatrix zero_c(topology_.users, 0.0);
  return observe(channel_.gains(), zero_p, zero_c);
}

RateMatrix Environment::evaluate(const PowerAllocation& p) const {
  return rates(channel_.gains(), p, noise_);
}

EnvStep Environment::step(const ActionTensor& actions) {
  if (!(actions.layout() == topology_.users)) throw UsageError("Environment::step: action shape");
  PowerAllocation powers(topology_.users);
  for (std::size_t i = 0; i < powers.flat().size(); ++i) {
    powers.flat()[i] = action_to_power(actions.flat()[i], config_.n_power_levels, p_max_);
  }
  return step_power(powers);
}

EnvStep Environment::step_power(const PowerAllocation& powers) {
  if (!started_) throw UsageError("Environment::step called before reset");
  if (done()) throw UsageError("Environment::step called after episode end");
  if (!(powers.layout() == topology_.users)) throw UsageError("Environment::step: power shape");
  for (double p : powers.flat()) {
    if (!(p >= 0.0 && p <= p_max_)) throw DomainError("Environment::step: power outside [0, P_max]");
  }

  EnvStep out;
  out.powers = powers;
  out.rates = rates(channel_.gains(), out.powers, noise_);
  out.rewards.resize(n_cells());
  for (std::size_t n = 0; n < n_cells(); ++n) {
    out.rewards[n] = reward(n, out.rates, config_.beta, topology_.neighbor_sets[n]);
  }

  channel_ = step_fading(std::move(channel_), rng_);
  ++slot_;
  out.observations = observe(channel_.gains(), out.powers, out.rates);
  out.done = done();
  return out;
}

}  // namespace fdrl
