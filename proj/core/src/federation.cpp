#include "fdrl/federation.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "fdrl/error.hpp"

namespace fdrl {

std::string_view to_string(TrainingMode mode) noexcept {
  switch (mode) {
    case TrainingMode::federated: return "federated";
    case TrainingMode::distributed: return "distributed";
    case TrainingMode::centralized: return "centralized";
  }
  return "unknown";
}

std::optional<TrainingMode> parse_mode(std::string_view text) noexcept {
  for (TrainingMode m :
       {TrainingMode::federated, TrainingMode::distributed, TrainingMode::centralized}) {
    if (text == to_string(m)) return m;
  }
  return std::nullopt;
}

std::vector<double> client_weights(const UserLayout& users) {
  const double total = static_cast<double>(users.total_users());
  if (total <= 0.0) throw DomainError("client_weights: no users");
  std::vector<double> w(users.n_cells());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = static_cast<double>(users.users_in(i)) / total;
  return w;
}

AggregationPlan make_plan(TrainingMode mode, std::size_t aggregation_period,
                          const UserLayout& users) {
  if (mode == TrainingMode::federated && aggregation_period < 1) {
    throw DomainError("make_plan: aggregation period must be >= 1");
  }
  return {mode, aggregation_period, client_weights(users)};
}

WeightVector fedavg(std::span<const WeightVector> clients, std::span<const double> weights) {
  if (clients.empty()) throw UsageError("fedavg: no clients");
  if (clients.size() != weights.size()) throw UsageError("fedavg: one weight per client required");
  const WeightLayout& layout = clients.front().layout;
  for (const WeightVector& c : clients) {
    if (!(c.layout == layout) || c.values.size() != layout.size()) {
      throw UsageError("fedavg: client layouts differ");
    }
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw DomainError("fedavg: negative client weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw DomainError("fedavg: client weights must sum to 1");

  WeightVector out{layout, std::vector<double>(layout.size(), 0.0)};
  for (std::size_t i = 0; i < clients.size(); ++i) {
    const auto& values = clients[i].values;
    for (std::size_t p = 0; p < values.size(); ++p) out.values[p] += weights[i] * values[p];
  }
  return out;
}

AggregationServer::AggregationServer(WeightLayout layout, std::vector<double> weights)
    : layout_(std::move(layout)), weights_(std::move(weights)), inbox_(weights_.size()) {}

void AggregationServer::upload(std::size_t client, std::span<const std::uint8_t> payload) {
  if (client >= inbox_.size()) throw UsageError("AggregationServer: unknown client");
  ++messages_;
  inbox_[client] = deserialize(payload, layout_);
}

std::vector<std::uint8_t> AggregationServer::aggregate() {
  for (const auto& slot : inbox_) {
    if (!slot) throw UsageError("AggregationServer: missing upload");
  }
  std::vector<WeightVector> clients;
  clients.reserve(inbox_.size());
  for (auto& slot : inbox_) {
    clients.push_back(std::move(*slot));
    slot.reset();
  }
  const WeightVector global = fedavg(clients, weights_);
  messages_ += inbox_.size();
  ++rounds_;
  return serialize(global);
}

ExplorationSchedule schedule_for(const TrainingConfig& config) {
  const auto horizon = static_cast<std::size_t>(
      std::llround(config.agent.eps_decay_frac * static_cast<double>(config.episodes)));
  return {config.agent.eps_start, config.agent.eps_end, horizon};
}

std::vector<std::unique_ptr<Agent>> make_agents(Algorithm algo, const Mlp& init,
                                                std::size_t n_agents, const AgentConfig& config) {
  std::vector<std::unique_ptr<Agent>> agents;
  agents.reserve(n_agents);
  for (std::size_t i = 0; i < n_agents; ++i) agents.push_back(make_agent(algo, init, config));
  return agents;
}

namespace {

std::vector<RandomStream> bs_streams(std::uint64_t seed, std::size_t n_cells) {
  std::vector<RandomStream> streams;
  streams.reserve(n_cells);
  for (std::size_t n = 0; n < n_cells; ++n) streams.emplace_back(derive_seed(seed, kBsStreamBase + n));
  return streams;
}

// Runs one training episode; agent_of(n) is the learner acting for BS n.
// Returns the mean per-user rate over the episode.
template <class AgentOf>
double play_episode(Environment& env, AgentOf&& agent_of, std::span<RandomStream> streams,
                    double eps) {
  const UserLayout& users = env.users();
  UserTensor<Observation> obs = env.reset();
  ActionTensor actions(env.users());
  double rate_sum = 0.0;
  std::size_t samples = 0;
  while (!env.done()) {
    for (std::size_t n = 0; n < env.n_cells(); ++n) {
      Agent& agent = agent_of(n);
      for (std::size_t k = 0; k < users.users_in(n); ++k) {
        actions(n, k) = agent.act(obs(n, k), eps, streams[n]);
      }
    }
    EnvStep step = env.step(actions);
    for (std::size_t n = 0; n < env.n_cells(); ++n) {
      Agent& agent = agent_of(n);
      for (std::size_t k = 0; k < users.users_in(n); ++k) {
        agent.record(users.flat(n, k), std::move(obs(n, k)), actions(n, k), step.rewards[n],
                     step.observations(n, k));
      }
    }
    for (double c : step.rates.flat()) rate_sum += c;
    samples += users.total_users();
    obs = std::move(step.observations);
  }
  return rate_sum / static_cast<double>(samples);
}

void write_checkpoint(const std::filesystem::path& dir, std::uint64_t round,
                      std::span<const std::uint8_t> payload) {
  std::filesystem::create_directories(dir);
  const auto path = dir / ("round_" + std::to_string(round) + ".bin");
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
  if (!out) throw IoError("cannot write checkpoint " + path.string());
}

RunMetrics run_local(Environment& env, std::span<const std::unique_ptr<Agent>> agents,
                     const AggregationPlan* plan, const TrainingConfig& config) {
  const std::size_t n_cells = env.n_cells();
  if (agents.size() != n_cells) throw UsageError("one agent per BS required");
  std::vector<RandomStream> streams = bs_streams(config.seed, n_cells);
  const ExplorationSchedule schedule = schedule_for(config);

  std::optional<AggregationServer> server;
  if (plan != nullptr) server.emplace(agents.front()->net().layout(), plan->client_weights);

  RunMetrics metrics;
  for (std::size_t e = 0; e < config.episodes; ++e) {
    const double eps = epsilon(schedule, e);
    const double rate =
        play_episode(env, [&](std::size_t n) -> Agent& { return *agents[n]; }, streams, eps);
    std::vector<double> losses(n_cells);
    for (std::size_t n = 0; n < n_cells; ++n) losses[n] = agents[n]->update();
    metrics.agent_episodes += n_cells;

    // Episodes are numbered from 1 for the aggregation schedule.
    const std::size_t episode_number = e + 1;
    if (server && plan->aggregation_period != kNeverAggregate &&
        episode_number % plan->aggregation_period == 0) {
      for (std::size_t n = 0; n < n_cells; ++n) server->upload(n, serialize(agents[n]->net().flatten()));
      const std::vector<std::uint8_t> broadcast = server->aggregate();
      const WeightVector global = deserialize(broadcast, agents.front()->net().layout());
      for (const auto& agent : agents) agent->net().restore(global);
      if (config.checkpoint_dir) write_checkpoint(*config.checkpoint_dir, server->rounds(), broadcast);
    }

    metrics.mean_rate.push_back(rate);
    metrics.epsilon.push_back(eps);
    metrics.loss.push_back(std::accumulate(losses.begin(), losses.end(), 0.0) /
                           static_cast<double>(n_cells));
    metrics.agent_loss.push_back(std::move(losses));
  }
  if (server) {
    metrics.server_messages = server->messages();
    metrics.aggregation_rounds = server->rounds();
  }
  return metrics;
}

}  // namespace

RunMetrics run_federated(Environment& env, std::span<const std::unique_ptr<Agent>> agents,
                         const AggregationPlan& plan, const TrainingConfig& config) {
  if (plan.mode != TrainingMode::federated) throw UsageError("run_federated: plan is not federated");
  if (plan.aggregation_period < 1) throw DomainError("run_federated: aggregation period must be >= 1");
  if (plan.client_weights.size() != env.n_cells()) throw UsageError("run_federated: client weights");
  return run_local(env, agents, &plan, config);
}

RunMetrics run_distributed(Environment& env, std::span<const std::unique_ptr<Agent>> agents,
                           const TrainingConfig& config) {
  return run_local(env, agents, nullptr, config);
}

RunMetrics run_centralized(Environment& env, Agent& shared, const TrainingConfig& config) {
  const std::size_t n_cells = env.n_cells();
  std::vector<RandomStream> streams = bs_streams(config.seed, n_cells);
  const ExplorationSchedule schedule = schedule_for(config);

  RunMetrics metrics;
  for (std::size_t e = 0; e < config.episodes; ++e) {
    const double eps = epsilon(schedule, e);
    const double rate = play_episode(env, [&](std::size_t) -> Agent& { return shared; }, streams, eps);
    const double loss = shared.update();
    metrics.server_messages += n_cells;
    metrics.agent_episodes += n_cells;
    metrics.mean_rate.push_back(rate);
    metrics.epsilon.push_back(eps);
    metrics.loss.push_back(loss);
    metrics.agent_loss.push_back({loss});
  }
  return metrics;
}

double comm_overhead(const RunMetrics& metrics, const AggregationPlan& plan, std::size_t n_cells,
                     std::size_t episodes) {
  if (episodes == 0) throw DomainError("comm_overhead: no episodes");
  if (n_cells == 0) throw DomainError("comm_overhead: no cells");
  const auto per_bs_episodes = static_cast<double>(episodes);
  switch (plan.mode) {
    case TrainingMode::distributed: return 0.0;
    case TrainingMode::centralized: {
      // One state upload per BS per episode.
      const std::uint64_t per_bs = metrics.server_messages / n_cells;
      return static_cast<double>(per_bs) / per_bs_episodes;
    }
    case TrainingMode::federated: {
      // A round trip is one upload plus one download.
      const std::uint64_t round_trips = metrics.server_messages / (2 * n_cells);
      return static_cast<double>(round_trips) / per_bs_episodes;
    }
  }
  return 0.0;
}

}  // namespace fdrl
