#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fdrl/channel.hpp"
#include "fdrl/random.hpp"
#include "fdrl/tensor.hpp"

namespace fdrl {

struct EnvConfig {
  std::size_t n_power_levels = 10;  // M
  double p_max_dbm = 38.0;
  double noise_dbm = -114.0;
  double beta = 1.0;
  std::size_t horizon = 10;  // T
};

double dbm_to_watts(double dbm) noexcept;

// Fixed feature scaling. Gains enter as (dB - gain_mean_db) / gain_scale_db.
struct NormStats {
  double gain_mean_db = -100.0;
  double gain_scale_db = 20.0;
  double p_max = 1.0;
  double rate_scale = 5.0;
  double clip = 40.0;
};

using Observation = std::vector<double>;
using ActionTensor = UserTensor<int>;

// Feature length: own gain, neighbor_count interference gains, previous
// power, previous rate.
constexpr std::size_t observation_dim(std::size_t neighbor_count) noexcept {
  return 3 + neighbor_count;
}

// Level `index` of the uniform grid {0, P_max/(M-1), ..., P_max}.
double action_to_power(int level_index, std::size_t n_levels, double p_max);

// Downlink SINR of user k in cell n. Intra-cell interference is weighted by
// the receiving user's own direct gain g[n][n][k].
double sinr(const GainTensor& g, const PowerAllocation& p, double noise, std::size_t n,
            std::size_t k);

// log2(1 + SINR) for every user, bandwidth normalized to 1.
RateMatrix rates(const GainTensor& g, const PowerAllocation& p, double noise);

double network_sum_rate(const RateMatrix& rates);

// Own-cell sum rate plus beta times the neighbor cells' sum rate.
double reward(std::size_t n, const RateMatrix& rates, double beta,
              std::span<const std::size_t> neighbors);

Observation build_observation(std::size_t n, std::size_t k, const GainTensor& g,
                              std::span<const std::size_t> neighbors, std::size_t neighbor_count,
                              const PowerAllocation& prev_p, const RateMatrix& prev_rates,
                              const NormStats& norm);

struct EnvStep {
  UserTensor<Observation> observations;  // built from the advanced channel
  std::vector<double> rewards;           // per BS
  RateMatrix rates;                      // at the slot the action was taken
  PowerAllocation powers;
  bool done = false;
};

// Multi-cell downlink power-control MDP. Every reset draws fresh user
// positions, large-scale gains and fading; each step applies powers on the
// current channel, then advances the fading one slot.
class Environment {
 public:
  Environment(TopologyConfig topology, EnvConfig env, std::uint64_t seed);

  UserTensor<Observation> reset();
  EnvStep step(const ActionTensor& actions);
  // Same transition driven by continuous powers (0 <= p <= P_max).
  EnvStep step_power(const PowerAllocation& powers);

  const Topology& topology() const noexcept { return topology_; }
  const ChannelState& channel() const noexcept { return channel_; }
  GainTensor current_gains() const { return channel_.gains(); }
  const TopologyConfig& topology_config() const noexcept { return topology_config_; }
  const EnvConfig& config() const noexcept { return config_; }
  const NormStats& norm() const noexcept { return norm_; }

  std::size_t n_cells() const noexcept { return topology_.n_cells(); }
  const UserLayout& users() const noexcept { return topology_.users; }
  std::size_t observation_size() const noexcept {
    return observation_dim(topology_config_.neighbor_count);
  }
  double p_max() const noexcept { return p_max_; }
  double noise() const noexcept { return noise_; }
  std::size_t slot() const noexcept { return slot_; }
  bool done() const noexcept { return slot_ >= config_.horizon; }

  // Observations of every user for the given channel and previous slot.
  UserTensor<Observation> observe(const GainTensor& g, const PowerAllocation& prev_p,
                                  const RateMatrix& prev_rates) const;
  // Evaluate a power allocation on the current channel without stepping.
  RateMatrix evaluate(const PowerAllocation& p) const;

 private:
  TopologyConfig topology_config_;
  EnvConfig config_;
  NormStats norm_;
  double p_max_;
  double noise_;
  RandomStream rng_;
  Topology topology_;
  ChannelState channel_;
  std::size_t slot_ = 0;
  bool started_ = false;
};

}  // namespace fdrl
