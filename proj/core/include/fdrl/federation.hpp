#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fdrl/agents.hpp"
#include "fdrl/netsim.hpp"
#include "fdrl/nn.hpp"

namespace fdrl {

enum class TrainingMode { federated, distributed, centralized };

std::string_view to_string(TrainingMode mode) noexcept;
std::optional<TrainingMode> parse_mode(std::string_view text) noexcept;

// Aggregation period meaning "never aggregate".
inline constexpr std::size_t kNeverAggregate = std::numeric_limits<std::size_t>::max();

struct AggregationPlan {
  TrainingMode mode = TrainingMode::federated;
  std::size_t aggregation_period = 100;  // Ag, episodes
  std::vector<double> client_weights;    // w_i = k_i / sum_j k_j
};

std::vector<double> client_weights(const UserLayout& users);
AggregationPlan make_plan(TrainingMode mode, std::size_t aggregation_period,
                          const UserLayout& users);

// Entrywise sum_i w_i theta_i.
WeightVector fedavg(std::span<const WeightVector> clients, std::span<const double> weights);

// In-process parameter server. Clients upload serialized weights, the server
// averages them in client-index order and returns the broadcast payload.
class AggregationServer {
 public:
  AggregationServer(WeightLayout layout, std::vector<double> weights);

  // Rejects (throws UsageError) payloads whose hash/length do not match.
  void upload(std::size_t client, std::span<const std::uint8_t> payload);
  // Requires one upload per client; counts one download per client.
  std::vector<std::uint8_t> aggregate();

  std::uint64_t messages() const noexcept { return messages_; }
  std::uint64_t rounds() const noexcept { return rounds_; }

 private:
  WeightLayout layout_;
  std::vector<double> weights_;
  std::vector<std::optional<WeightVector>> inbox_;
  std::uint64_t messages_ = 0;
  std::uint64_t rounds_ = 0;
};

struct TrainingConfig {
  std::size_t episodes = 2000;  // N_e
  AgentConfig agent;
  std::uint64_t seed = 1;
  // When set, every broadcast payload is written as round_<r>.bin here.
  std::optional<std::filesystem::path> checkpoint_dir;
};

struct RunMetrics {
  std::vector<double> mean_rate;                 // per episode, bit/s/Hz per user
  std::vector<double> loss;                      // per episode, mean over agents
  std::vector<double> epsilon;                   // per episode
  std::vector<std::vector<double>> agent_loss;   // [episode][agent]
  std::uint64_t server_messages = 0;
  std::uint64_t agent_episodes = 0;
  std::uint64_t aggregation_rounds = 0;
};

// Streams: per-BS action sampling uses derive_seed(seed, kBsStreamBase + n).
inline constexpr std::uint64_t kBsStreamBase = 1000;

ExplorationSchedule schedule_for(const TrainingConfig& config);

// One agent per BS, all started from `init`.
std::vector<std::unique_ptr<Agent>> make_agents(Algorithm algo, const Mlp& init,
                                                std::size_t n_agents, const AgentConfig& config);

RunMetrics run_federated(Environment& env, std::span<const std::unique_ptr<Agent>> agents,
                         const AggregationPlan& plan, const TrainingConfig& config);
RunMetrics run_distributed(Environment& env, std::span<const std::unique_ptr<Agent>> agents,
                           const TrainingConfig& config);
// A single shared model serves every BS; all transitions are pooled.
RunMetrics run_centralized(Environment& env, Agent& shared, const TrainingConfig& config);

// Server round-trips per BS per episode.
double comm_overhead(const RunMetrics& metrics, const AggregationPlan& plan, std::size_t n_cells,
                     std::size_t episodes);

}  // namespace fdrl
