#include "fdrl/agents.hpp"

#include <algorithm>
#include <cmath>

#include "fdrl/error.hpp"

namespace fdrl {

std::string_view to_string(Algorithm algo) noexcept {
  switch (algo) {
    case Algorithm::dqn: return "dqn";
    case Algorithm::pg: return "pg";
    case Algorithm::wmmse: return "wmmse";
    case Algorithm::maxpower: return "maxpower";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view text) noexcept {
  for (Algorithm a : {Algorithm::dqn, Algorithm::pg, Algorithm::wmmse, Algorithm::maxpower}) {
    if (text == to_string(a)) return a;
  }
  return std::nullopt;
}

bool is_learning(Algorithm algo) noexcept {
  return algo == Algorithm::dqn || algo == Algorithm::pg;
}

double epsilon(const ExplorationSchedule& schedule, std::size_t episode) {
  if (schedule.decay_horizon == 0 || episode >= schedule.decay_horizon) return schedule.end;
  const double frac = static_cast<double>(episode) / static_cast<double>(schedule.decay_horizon);
  return schedule.start + (schedule.end - schedule.start) * frac;
}

void EpisodeBuffer::push(Transition t) {
  if (capacity_ != 0 && items_.size() >= capacity_) throw UsageError("EpisodeBuffer is full");
  items_.push_back(std::move(t));
}

int argmax(std::span<const double> values) {
  if (values.empty()) throw UsageError("argmax of empty range");
  return static_cast<int>(std::max_element(values.begin(), values.end()) - values.begin());
}

int select_action_dqn(const Mlp& net, std::span<const double> state, double eps,
                      RandomStream& rng) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw DomainError("select_action_dqn: eps outside [0, 1]");
  const double r = rng.uniform();
  if (r >= eps) return greedy_action(net, state);
  return static_cast<int>(rng.index(net.output_dim()));
}

SampledAction select_action_pg(const Mlp& net, std::span<const double> state, RandomStream& rng) {
  const std::vector<double> logits = net.forward(state);
  const std::vector<double> p = softmax(logits);
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t chosen = p.size() - 1;
  for (std::size_t i = 0; i < p.size(); ++i) {
    cumulative += p[i];
    if (u < cumulative) {
      chosen = i;
      break;
    }
  }
  return {static_cast<int>(chosen), std::log(p[chosen])};
}

int greedy_action(const Mlp& net, std::span<const double> state) {
  return argmax(net.forward(state));
}

double dqn_update(Mlp& net, AdamState& adam, std::span<const Transition> transitions, double gamma,
                  const Mlp* target_net) {
  if (transitions.empty()) throw UsageError("dqn_update: no transitions");
  const Mlp& bootstrap = target_net != nullptr ? *target_net : net;
  const double scale = 1.0 / static_cast<double>(transitions.size());
  std::vector<double> grad(net.n_params(), 0.0);
  std::vector<double> dq(net.output_dim());
  double loss = 0.0;
  for (const Transition& tr : transitions) {
    if (tr.action < 0 || static_cast<std::size_t>(tr.action) >= net.output_dim()) {
      throw UsageError("dqn_update: action out of range");
    }
    const std::vector<double> next_q = bootstrap.forward(tr.next_state);
    const double target = tr.reward + gamma * *std::max_element(next_q.begin(), next_q.end());
    const std::vector<double> q = net.forward(tr.state);
    const double err = target - q[static_cast<std::size_t>(tr.action)];
    loss += err * err;
    std::fill(dq.begin(), dq.end(), 0.0);
    dq[static_cast<std::size_t>(tr.action)] = -2.0 * err;
    net.backward(tr.state, dq, grad, scale);
  }
  adam_step(net.params(), grad, adam);
  return loss * scale;
}

double dqn_episode_update(Mlp& net, AdamState& adam, EpisodeBuffer& buffer, double gamma) {
  if (buffer.empty()) throw UsageError("dqn_episode_update: empty buffer");
  const double loss = dqn_update(net, adam, buffer.items(), gamma);
  buffer.clear();
  return loss;
}

std::vector<double> discounted_returns(std::span<const double> rewards, double gamma) {
  std::vector<double> out(rewards.size());
  double running = 0.0;
  for (std::size_t t = rewards.size(); t-- > 0;) {
    running = rewards[t] + gamma * running;
    out[t] = running;
  }
  return out;
}

double pg_episode_update(Mlp& net, AdamState& adam, std::span<const Trajectory> episode,
                         double gamma, bool use_baseline) {
  if (episode.empty()) throw UsageError("pg_episode_update: empty episode");
  const double scale = 1.0 / static_cast<double>(episode.size());
  std::vector<double> grad(net.n_params(), 0.0);
  std::vector<double> dlogits(net.output_dim());
  double objective = 0.0;
  for (const Trajectory& traj : episode) {
    if (traj.empty()) throw UsageError("pg_episode_update: empty trajectory");
    std::vector<double> rewards;
    rewards.reserve(traj.size());
    for (const PgStep& step : traj) rewards.push_back(step.reward);
    const std::vector<double> returns = discounted_returns(rewards, gamma);
    double baseline = 0.0;
    if (use_baseline) {
      for (double r : returns) baseline += r;
      baseline /= static_cast<double>(returns.size());
    }
    for (std::size_t t = 0; t < traj.size(); ++t) {
      const PgStep& step = traj[t];
      if (step.action < 0 || static_cast<std::size_t>(step.action) >= net.output_dim()) {
        throw UsageError("pg_episode_update: action out of range");
      }
      const double advantage = returns[t] - baseline;
      if (advantage == 0.0) continue;
      const std::vector<double> logits = net.forward(step.state);
      const std::vector<double> p = softmax(logits);
      const auto a = static_cast<std::size_t>(step.action);
      objective += std::log(p[a]) * advantage * scale;
      // Ascent on J is descent on -J.
      for (std::size_t i = 0; i < p.size(); ++i) {
        dlogits[i] = -((i == a ? 1.0 : 0.0) - p[i]) * advantage;
      }
      net.backward(step.state, dlogits, grad, scale);
    }
  }
  adam_step(net.params(), grad, adam);
  return objective;
}

std::vector<std::size_t> network_dims(std::size_t input_dim, const AgentConfig& config,
                                      std::size_t n_actions) {
  std::vector<std::size_t> dims{input_dim};
  dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
  dims.push_back(n_actions);
  return dims;
}

Agent::Agent(Mlp init, const AgentConfig& config)
    : net_(std::move(init)), adam_(net_.n_params(), config.learning_rate), config_(config) {}

DqnAgent::DqnAgent(Mlp init, const AgentConfig& config) : Agent(std::move(init), config) {
  if (config_.use_target_net) target_ = net_;
}

int DqnAgent::act(std::span<const double> state, double eps, RandomStream& rng) {
  return select_action_dqn(net_, state, eps, rng);
}

int DqnAgent::greedy(std::span<const double> state) const { return greedy_action(net_, state); }

void DqnAgent::record(std::size_t /*link*/, Observation state, int action, double reward,
                      Observation next_state) {
  buffer_.push({std::move(state), action, reward * config_.reward_scale, std::move(next_state)});
}

double DqnAgent::update() {
  if (buffer_.empty()) throw UsageError("DqnAgent::update: empty buffer");
  const Mlp* target = target_ ? &*target_ : nullptr;
  double loss = 0.0;
  if (config_.replay_capacity > buffer_.size()) {
    for (const Transition& tr : buffer_.items()) {
      if (replay_.size() < config_.replay_capacity) {
        replay_.push_back(tr);
      } else {
        replay_[replay_next_] = tr;
      }
      replay_next_ = (replay_next_ + 1) % config_.replay_capacity;
    }
    buffer_.clear();
    loss = dqn_update(net_, adam_, replay_, config_.dqn_gamma, target);
  } else {
    loss = dqn_update(net_, adam_, buffer_.items(), config_.dqn_gamma, target);
    buffer_.clear();
  }
  ++updates_;
  if (target_ && config_.target_sync_period > 0 && updates_ % config_.target_sync_period == 0) {
    target_ = net_;
  }
  return loss;
}

PgAgent::PgAgent(Mlp init, const AgentConfig& config) : Agent(std::move(init), config) {}

int PgAgent::act(std::span<const double> state, double /*eps*/, RandomStream& rng) {
  return select_action_pg(net_, state, rng).index;
}

int PgAgent::greedy(std::span<const double> state) const { return greedy_action(net_, state); }

void PgAgent::record(std::size_t link, Observation state, int action, double reward,
                     Observation /*next_state*/) {
  trajectories_[link].push_back({std::move(state), action, reward * config_.reward_scale});
}

double PgAgent::update() {
  if (trajectories_.empty()) throw UsageError("PgAgent::update: no trajectories");
  std::vector<Trajectory> episode;
  episode.reserve(trajectories_.size());
  for (auto& [link, traj] : trajectories_) episode.push_back(std::move(traj));
  trajectories_.clear();
  return pg_episode_update(net_, adam_, episode, config_.gamma, config_.use_baseline);
}

std::unique_ptr<Agent> make_agent(Algorithm algo, Mlp init, const AgentConfig& config) {
  switch (algo) {
    case Algorithm::dqn: return std::make_unique<DqnAgent>(std::move(init), config);
    case Algorithm::pg: return std::make_unique<PgAgent>(std::move(init), config);
    default: throw UsageError("make_agent: not a learning algorithm");
  }
}

}  // namespace fdrl
