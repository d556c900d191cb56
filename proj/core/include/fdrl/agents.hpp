#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fdrl/netsim.hpp"
#include "fdrl/nn.hpp"
#include "fdrl/random.hpp"

namespace fdrl {

enum class Algorithm { dqn, pg, wmmse, maxpower };

std::string_view to_string(Algorithm algo) noexcept;
std::optional<Algorithm> parse_algorithm(std::string_view text) noexcept;
bool is_learning(Algorithm algo) noexcept;

struct AgentConfig {
  double gamma = 0.9;      // policy-gradient discount
  double dqn_gamma = 0.5;  // bootstrap discount for the Q-learner
  double eps_start = 0.9;
  double eps_end = 0.01;
  double eps_decay_frac = 0.8;  // of the training episodes
  bool use_baseline = true;
  bool use_target_net = false;
  std::size_t target_sync_period = 10;  // episodes between target refreshes
  std::size_t replay_capacity = 0;      // transitions; <= one episode disables replay
  double learning_rate = 1e-3;
  double reward_scale = 1.0;  // multiplies rewards before they reach the learner
  std::vector<std::size_t> hidden = {128, 64};
};

struct ExplorationSchedule {
  double start = 0.9;
  double end = 0.01;
  std::size_t decay_horizon = 1;  // episodes
};

// Linear decay from start to end over decay_horizon episodes, then flat.
double epsilon(const ExplorationSchedule& schedule, std::size_t episode);

struct Transition {
  Observation state;
  int action = 0;
  double reward = 0.0;
  Observation next_state;
};

class EpisodeBuffer {
 public:
  explicit EpisodeBuffer(std::size_t capacity = 0) : capacity_(capacity) {}

  void push(Transition t);
  void clear() noexcept { items_.clear(); }
  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  std::size_t capacity() const noexcept { return capacity_; }
  std::span<const Transition> items() const noexcept { return items_; }

 private:
  std::size_t capacity_;
  std::vector<Transition> items_;
};

// Index of the largest entry; the lowest index wins ties.
int argmax(std::span<const double> values);

// Epsilon-greedy: greedy iff a uniform draw r satisfies r >= eps.
int select_action_dqn(const Mlp& net, std::span<const double> state, double eps,
                      RandomStream& rng);

struct SampledAction {
  int index = 0;
  double log_prob = 0.0;
};

SampledAction select_action_pg(const Mlp& net, std::span<const double> state, RandomStream& rng);

int greedy_action(const Mlp& net, std::span<const double> state);

// One Adam step on the mean TD loss of `transitions`; targets come from
// `target_net` when given, otherwise from `net` itself. Returns the mean loss.
double dqn_update(Mlp& net, AdamState& adam, std::span<const Transition> transitions, double gamma,
                  const Mlp* target_net = nullptr);

// dqn_update over the episode buffer, which is cleared afterwards.
double dqn_episode_update(Mlp& net, AdamState& adam, EpisodeBuffer& buffer, double gamma);

struct PgStep {
  Observation state;
  int action = 0;
  double reward = 0.0;
};

using Trajectory = std::vector<PgStep>;

// R_t = sum_{i >= t} gamma^(i - t) r_i.
std::vector<double> discounted_returns(std::span<const double> rewards, double gamma);

// REINFORCE ascent step. The gradient is the mean over trajectories of
// sum_t grad log pi(a_t | s_t) (R_t - b), with b the trajectory's mean return
// when use_baseline is set. Returns the surrogate objective.
double pg_episode_update(Mlp& net, AdamState& adam, std::span<const Trajectory> episode,
                         double gamma, bool use_baseline);

// A learner owned by one BS (or by the server in centralized mode). `link`
// identifies which user trajectory a recorded step belongs to.
class Agent {
 public:
  Agent(Mlp init, const AgentConfig& config);
  virtual ~Agent() = default;

  Agent(const Agent&) = delete;
  Agent& operator=(const Agent&) = delete;

  virtual int act(std::span<const double> state, double eps, RandomStream& rng) = 0;
  virtual int greedy(std::span<const double> state) const = 0;
  virtual void record(std::size_t link, Observation state, int action, double reward,
                      Observation next_state) = 0;
  // End-of-episode learning step; returns the loss (DQN) or objective (PG).
  virtual double update() = 0;

  const Mlp& net() const noexcept { return net_; }
  Mlp& net() noexcept { return net_; }
  const AdamState& optimizer() const noexcept { return adam_; }
  const AgentConfig& config() const noexcept { return config_; }

 protected:
  Mlp net_;
  AdamState adam_;
  AgentConfig config_;
};

class DqnAgent final : public Agent {
 public:
  DqnAgent(Mlp init, const AgentConfig& config);

  int act(std::span<const double> state, double eps, RandomStream& rng) override;
  int greedy(std::span<const double> state) const override;
  void record(std::size_t link, Observation state, int action, double reward,
              Observation next_state) override;
  double update() override;

  const EpisodeBuffer& buffer() const noexcept { return buffer_; }

 private:
  EpisodeBuffer buffer_;
  std::vector<Transition> replay_;  // ring, used when replay_capacity is set
  std::size_t replay_next_ = 0;
  std::optional<Mlp> target_;
  std::size_t updates_ = 0;
};

class PgAgent final : public Agent {
 public:
  PgAgent(Mlp init, const AgentConfig& config);

  int act(std::span<const double> state, double eps, RandomStream& rng) override;
  int greedy(std::span<const double> state) const override;
  void record(std::size_t link, Observation state, int action, double reward,
              Observation next_state) override;
  double update() override;

 private:
  std::map<std::size_t, Trajectory> trajectories_;
};

std::unique_ptr<Agent> make_agent(Algorithm algo, Mlp init, const AgentConfig& config);

// [input, hidden..., n_actions]
std::vector<std::size_t> network_dims(std::size_t input_dim, const AgentConfig& config,
                                      std::size_t n_actions);

}  // namespace fdrl
