#include "fdrl/experiment.hpp"

#include <fmt/format.h>

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "fdrl/baselines.hpp"
#include "fdrl/error.hpp"

namespace fdrl {
namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class Int>
Int parse_uint(std::string_view key, std::string_view text) {
  Int value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError(std::string(key), "expected a non-negative integer, got '" + std::string(text) + "'");
  }
  return value;
}

double parse_double(std::string_view key, std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw ConfigError(std::string(key), "expected a finite number, got '" + std::string(text) + "'");
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError(std::string(key), "expected a boolean, got '" + std::string(text) + "'");
}

std::size_t parse_period(std::string_view key, std::string_view text) {
  if (text == "inf" || text == "never") return kNeverAggregate;
  return parse_uint<std::size_t>(key, text);
}

std::vector<std::size_t> parse_list(std::string_view key, std::string_view text) {
  std::vector<std::size_t> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    out.push_back(parse_uint<std::size_t>(key, trim(text.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

std::string show(double v) { return fmt::format("{}", v); }
std::string show(std::size_t v) { return fmt::format("{}", v); }
std::string show(bool v) { return v ? "true" : "false"; }

struct Field {
  std::string name;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define FDRL_SIZE_FIELD(key, member)                                                        \
  Field{key, [](ExperimentConfig& c, std::string_view v) { c.member = parse_uint<std::size_t>(key, v); }, \
        [](const ExperimentConfig& c) { return show(static_cast<std::size_t>(c.member)); }}
#define FDRL_REAL_FIELD(key, member)                                                     \
  Field{key, [](ExperimentConfig& c, std::string_view v) { c.member = parse_double(key, v); }, \
        [](const ExperimentConfig& c) { return show(c.member); }}
#define FDRL_BOOL_FIELD(key, member)                                                   \
  Field{key, [](ExperimentConfig& c, std::string_view v) { c.member = parse_bool(key, v); }, \
        [](const ExperimentConfig& c) { return show(c.member); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      FDRL_SIZE_FIELD("grid_side", topology.grid_side),
      FDRL_SIZE_FIELD("users_per_cell", topology.users_per_cell),
      FDRL_REAL_FIELD("inter_site_distance_m", topology.inter_site_distance_m),
      FDRL_SIZE_FIELD("neighbor_count", topology.neighbor_count),
      FDRL_REAL_FIELD("d_min_m", topology.d_min_m),
      FDRL_REAL_FIELD("shadowing_sigma_db", topology.shadowing_sigma_db),
      FDRL_REAL_FIELD("doppler_hz", topology.doppler_hz),
      FDRL_REAL_FIELD("slot_duration_s", topology.slot_duration_s),
      FDRL_SIZE_FIELD("n_power_levels", env.n_power_levels),
      FDRL_REAL_FIELD("p_max_dbm", env.p_max_dbm),
      FDRL_REAL_FIELD("noise_dbm", env.noise_dbm),
      FDRL_REAL_FIELD("beta", env.beta),
      FDRL_SIZE_FIELD("horizon_T", env.horizon),
      FDRL_REAL_FIELD("gamma", agent.gamma),
      FDRL_REAL_FIELD("dqn_gamma", agent.dqn_gamma),
      FDRL_REAL_FIELD("eps_start", agent.eps_start),
      FDRL_REAL_FIELD("eps_end", agent.eps_end),
      FDRL_REAL_FIELD("eps_decay_frac", agent.eps_decay_frac),
      FDRL_BOOL_FIELD("use_baseline", agent.use_baseline),
      FDRL_BOOL_FIELD("use_target_net", agent.use_target_net),
      FDRL_SIZE_FIELD("target_sync_period", agent.target_sync_period),
      FDRL_SIZE_FIELD("replay_capacity", agent.replay_capacity),
      FDRL_REAL_FIELD("learning_rate", agent.learning_rate),
      FDRL_REAL_FIELD("reward_scale", agent.reward_scale),
      Field{"hidden_layers",
            [](ExperimentConfig& c, std::string_view v) { c.agent.hidden = parse_list("hidden_layers", v); },
            [](const ExperimentConfig& c) {
              std::string out;
              for (std::size_t i = 0; i < c.agent.hidden.size(); ++i) {
                out += (i ? "," : "") + show(c.agent.hidden[i]);
              }
              return out;
            }},
      Field{"mode",
            [](ExperimentConfig& c, std::string_view v) {
              const auto mode = parse_mode(v);
              if (!mode) throw ConfigError("mode", "expected federated|distributed|centralized");
              c.mode = *mode;
            },
            [](const ExperimentConfig& c) { return std::string(to_string(c.mode)); }},
      Field{"agg_period",
            [](ExperimentConfig& c, std::string_view v) { c.agg_period = parse_period("agg_period", v); },
            [](const ExperimentConfig& c) {
              return c.agg_period == kNeverAggregate ? std::string("inf") : show(c.agg_period);
            }},
      Field{"algorithm",
            [](ExperimentConfig& c, std::string_view v) {
              const auto algo = parse_algorithm(v);
              if (!algo) throw ConfigError("algorithm", "expected dqn|pg|wmmse|maxpower");
              c.algorithm = *algo;
            },
            [](const ExperimentConfig& c) { return std::string(to_string(c.algorithm)); }},
      FDRL_SIZE_FIELD("episodes", episodes),
      FDRL_SIZE_FIELD("eval_episodes", eval_episodes),
      Field{"seed", [](ExperimentConfig& c, std::string_view v) { c.seed = parse_uint<std::uint64_t>("seed", v); },
            [](const ExperimentConfig& c) { return fmt::format("{}", c.seed); }},
      FDRL_SIZE_FIELD("smoothing_window", smoothing_window),
      FDRL_SIZE_FIELD("final_window", final_window),
      Field{"out_dir", [](ExperimentConfig& c, std::string_view v) { c.out_dir = std::string(v); },
            [](const ExperimentConfig& c) { return c.out_dir.string(); }},
      FDRL_BOOL_FIELD("timing", timing),
      FDRL_REAL_FIELD("server_latency_s", server_latency_s),
      FDRL_BOOL_FIELD("checkpoints", checkpoints),
  };
  return table;
}

#undef FDRL_SIZE_FIELD
#undef FDRL_REAL_FIELD
#undef FDRL_BOOL_FIELD

double mean_of(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double stddev_of(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(xs.size()));
}

using Clock = std::chrono::steady_clock;

// Greedy rollout of trained agents on fresh evaluation episodes.
template <class AgentOf>
EvalResult evaluate_agents(const ExperimentConfig& config, AgentOf&& agent_of, double extra_latency) {
  Environment env(config.topology, config.env, derive_seed(config.seed, kEvalEnvStream));
  EvalResult result;
  double latency_total = 0.0;
  std::size_t decisions = 0;
  for (std::size_t e = 0; e < config.eval_episodes; ++e) {
    UserTensor<Observation> obs = env.reset();
    ActionTensor actions(env.users());
    double rate_sum = 0.0;
    std::size_t samples = 0;
    while (!env.done()) {
      for (std::size_t n = 0; n < env.n_cells(); ++n) {
        const Agent& agent = agent_of(n);
        for (std::size_t k = 0; k < env.users().users_in(n); ++k) {
          if (config.timing) {
            const auto start = Clock::now();
            actions(n, k) = agent.greedy(obs(n, k));
            latency_total += std::chrono::duration<double>(Clock::now() - start).count();
            ++decisions;
          } else {
            actions(n, k) = agent.greedy(obs(n, k));
          }
        }
      }
      EnvStep step = env.step(actions);
      for (double c : step.rates.flat()) rate_sum += c;
      samples += env.users().total_users();
      obs = std::move(step.observations);
    }
    result.episode_rates.push_back(rate_sum / static_cast<double>(samples));
  }
  result.mean = mean_of(result.episode_rates);
  result.stddev = stddev_of(result.episode_rates);
  if (config.timing && decisions > 0) {
    result.decision_latency_s = latency_total / static_cast<double>(decisions) + extra_latency;
  }
  return result;
}

}  // namespace

void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value) {
  for (const Field& f : fields()) {
    if (f.name == key) {
      f.set(config, trim(value));
      return;
    }
  }
  throw ConfigError(std::string(key), "unknown configuration key");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const Field& f : fields()) out.push_back(f.name);
    return out;
  }();
  return keys;
}

std::string to_config_text(const ExperimentConfig& config) {
  std::string out;
  for (const Field& f : fields()) out += f.name + " = " + f.get(config) + "\n";
  return out;
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    }
    apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void validate(const ExperimentConfig& c) {
  auto require = [](bool ok, const char* field, const char* what) {
    if (!ok) throw ConfigError(field, what);
  };
  require(c.topology.grid_side >= 1, "grid_side", "must be >= 1");
  require(c.topology.users_per_cell >= 1, "users_per_cell", "must be >= 1");
  require(c.topology.inter_site_distance_m > 0.0, "inter_site_distance_m", "must be > 0");
  require(c.topology.d_min_m >= 0.0 && 2.0 * c.topology.d_min_m < c.topology.inter_site_distance_m,
          "d_min_m", "must be in [0, inter_site_distance_m / 2)");
  require(c.topology.shadowing_sigma_db >= 0.0, "shadowing_sigma_db", "must be >= 0");
  require(c.topology.doppler_hz >= 0.0, "doppler_hz", "must be >= 0");
  require(c.topology.slot_duration_s > 0.0, "slot_duration_s", "must be > 0");
  require(c.env.n_power_levels >= 2, "n_power_levels", "must be >= 2");
  require(c.env.beta >= 0.0, "beta", "must be >= 0");
  require(c.env.horizon >= 1, "horizon_T", "must be >= 1");
  require(c.agent.gamma >= 0.0 && c.agent.gamma <= 1.0, "gamma", "must be in [0, 1]");
  require(c.agent.dqn_gamma >= 0.0 && c.agent.dqn_gamma <= 1.0, "dqn_gamma", "must be in [0, 1]");
  require(c.agent.eps_start >= 0.0 && c.agent.eps_start <= 1.0, "eps_start", "must be in [0, 1]");
  require(c.agent.eps_end >= 0.0 && c.agent.eps_end <= c.agent.eps_start, "eps_end",
          "must be in [0, eps_start]");
  require(c.agent.eps_decay_frac >= 0.0 && c.agent.eps_decay_frac <= 1.0, "eps_decay_frac",
          "must be in [0, 1]");
  require(c.agent.learning_rate >= 0.0, "learning_rate", "must be >= 0");
  for (std::size_t h : c.agent.hidden) require(h >= 1, "hidden_layers", "widths must be >= 1");
  require(c.mode != TrainingMode::federated || c.agg_period >= 1, "agg_period", "must be >= 1");
  require(c.episodes >= 1, "episodes", "must be >= 1");
  require(c.eval_episodes >= 1, "eval_episodes", "must be >= 1");
  require(c.smoothing_window >= 1, "smoothing_window", "must be >= 1");
  require(c.final_window >= 1, "final_window", "must be >= 1");
  require(c.server_latency_s >= 0.0, "server_latency_s", "must be >= 0");
}

std::vector<double> smooth(std::span<const double> series, std::size_t window) {
  if (window < 1) throw DomainError("smooth: window must be >= 1");
  std::vector<double> out;
  out.reserve((series.size() + window - 1) / window);
  for (std::size_t begin = 0; begin < series.size(); begin += window) {
    out.push_back(mean_of(series.subspan(begin, std::min(window, series.size() - begin))));
  }
  return out;
}

std::string algorithm_label(Algorithm algo, TrainingMode mode) {
  if (algo == Algorithm::wmmse) return "WMMSE";
  if (algo == Algorithm::maxpower) return "Max Power";
  const std::string base = algo == Algorithm::dqn ? "DQN" : "DPG";
  switch (mode) {
    case TrainingMode::federated: return "F" + base;
    case TrainingMode::distributed: return base + "-Dist";
    case TrainingMode::centralized: return base + "-Cent";
  }
  return base;
}

ExperimentResult run_baseline(const ExperimentConfig& config) {
  validate(config);
  if (is_learning(config.algorithm)) throw ConfigError("algorithm", "not a baseline");
  Environment env(config.topology, config.env, derive_seed(config.seed, kEvalEnvStream));
  ExperimentResult result;
  double latency_total = 0.0;
  std::size_t decisions = 0;
  for (std::size_t e = 0; e < config.eval_episodes; ++e) {
    env.reset();
    double rate_sum = 0.0;
    std::size_t samples = 0;
    while (!env.done()) {
      const std::size_t slot = env.slot();
      const auto start = Clock::now();
      PowerAllocation p = config.algorithm == Algorithm::maxpower
                              ? max_power(env.users(), env.p_max())
                              : wmmse(env.current_gains(), env.p_max(), env.noise()).power;
      latency_total += std::chrono::duration<double>(Clock::now() - start).count();
      decisions += env.n_cells();
      EnvStep step = env.step_power(p);
      const double sum_rate = network_sum_rate(step.rates);
      rate_sum += sum_rate;
      samples += env.users().total_users();
      result.instances.push_back({e, slot, std::vector<double>(p.flat().begin(), p.flat().end()), sum_rate});
    }
    result.eval.episode_rates.push_back(rate_sum / static_cast<double>(samples));
  }
  result.eval.mean = mean_of(result.eval.episode_rates);
  result.eval.stddev = stddev_of(result.eval.episode_rates);
  if (config.timing && decisions > 0) {
    result.eval.decision_latency_s = latency_total / static_cast<double>(decisions);
  }

  // No training: the learning curve is the evaluation mean at every episode.
  result.metrics.mean_rate.assign(config.episodes, result.eval.mean);
  result.metrics.loss.assign(config.episodes, 0.0);
  result.metrics.epsilon.assign(config.episodes, 0.0);
  result.summary = {algorithm_label(config.algorithm, config.mode), result.eval.mean,
                    result.eval.stddev, result.eval.decision_latency_s,
                    config.algorithm == Algorithm::wmmse ? 1.0 : 0.0};
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  validate(config);
  if (!is_learning(config.algorithm)) return run_baseline(config);

  Environment env(config.topology, config.env, derive_seed(config.seed, kTrainEnvStream));
  RandomStream init_rng(derive_seed(config.seed, kInitWeightsStream));
  const Mlp init = init_weights(
      network_dims(env.observation_size(), config.agent, config.env.n_power_levels), init_rng);

  TrainingConfig training{config.episodes, config.agent, config.seed, std::nullopt};
  if (config.checkpoints) training.checkpoint_dir = config.out_dir / "checkpoints";
  const AggregationPlan plan = make_plan(config.mode, config.agg_period, env.users());

  ExperimentResult result;
  if (config.mode == TrainingMode::centralized) {
    const auto shared = make_agent(config.algorithm, init, config.agent);
    result.metrics = run_centralized(env, *shared, training);
    result.eval = evaluate_agents(config, [&](std::size_t) -> const Agent& { return *shared; },
                                  config.server_latency_s);
  } else {
    const auto agents = make_agents(config.algorithm, init, env.n_cells(), config.agent);
    result.metrics = config.mode == TrainingMode::federated
                         ? run_federated(env, agents, plan, training)
                         : run_distributed(env, agents, training);
    result.eval = evaluate_agents(config, [&](std::size_t n) -> const Agent& { return *agents[n]; },
                                  0.0);
  }
  result.summary = {algorithm_label(config.algorithm, config.mode), result.eval.mean,
                    result.eval.stddev, result.eval.decision_latency_s,
                    comm_overhead(result.metrics, plan, env.n_cells(), config.episodes)};
  return result;
}

std::vector<ComparisonSeries> compare_modes(const ExperimentConfig& base) {
  struct Cell {
    TrainingMode mode;
    std::optional<std::size_t> agg;
  };
  const Cell cells[] = {{TrainingMode::distributed, std::nullopt},
                        {TrainingMode::centralized, std::nullopt},
                        {TrainingMode::federated, 10},
                        {TrainingMode::federated, 100},
                        {TrainingMode::federated, 1000}};
  std::vector<ComparisonSeries> out;
  for (const Cell& cell : cells) {
    ExperimentConfig config = base;
    config.mode = cell.mode;
    if (cell.agg) config.agg_period = *cell.agg;
    const ExperimentResult result = run_experiment(config);
    ComparisonSeries series;
    series.label = algorithm_label(config.algorithm, cell.mode);
    if (cell.agg) series.label += "-Ag" + std::to_string(*cell.agg);
    series.mode = cell.mode;
    series.agg_period = cell.agg;
    series.curve = smooth(result.metrics.mean_rate, config.smoothing_window);
    const std::size_t tail = std::min(config.final_window, result.metrics.mean_rate.size());
    series.final_mean = mean_of(std::span<const double>(result.metrics.mean_rate).last(tail));
    series.summary = result.summary;
    out.push_back(std::move(series));
  }
  return out;
}

namespace {

std::string csv_from(std::span<const double> rate, std::span<const double> loss,
                     std::span<const double> eps, std::span<const std::size_t> episode) {
  std::string out = "episode,mean_rate_per_user,loss,epsilon\n";
  for (std::size_t i = 0; i < rate.size(); ++i) {
    out += fmt::format("{},{},{},{}\n", episode[i], rate[i], loss[i], eps[i]);
  }
  return out;
}

std::vector<double> epsilon_column(const ExperimentResult& result, const ExperimentConfig& config) {
  if (config.algorithm == Algorithm::dqn) return result.metrics.epsilon;
  return std::vector<double>(result.metrics.mean_rate.size(), 0.0);
}

json summary_object(const SummaryRecord& s) {
  json j;
  j["algorithm"] = s.algorithm;
  j["mean_rate_per_user"] = s.mean_rate_per_user;
  j["std_rate_per_user"] = s.std_rate_per_user;
  j["decision_latency_s"] = s.decision_latency_s ? json(*s.decision_latency_s) : json(nullptr);
  j["comm_overhead"] = s.comm_overhead;
  return j;
}

}  // namespace

std::string curve_csv(const ExperimentResult& result, const ExperimentConfig& config) {
  const auto& m = result.metrics;
  std::vector<std::size_t> episode(m.mean_rate.size());
  std::iota(episode.begin(), episode.end(), std::size_t{1});
  return csv_from(m.mean_rate, m.loss, epsilon_column(result, config), episode);
}

std::string smoothed_curve_csv(const ExperimentResult& result, const ExperimentConfig& config) {
  const auto& m = result.metrics;
  const std::size_t w = config.smoothing_window;
  const auto rate = smooth(m.mean_rate, w);
  const auto loss = smooth(m.loss, w);
  const auto eps = smooth(epsilon_column(result, config), w);
  // Each row is labelled with the last episode of its block.
  std::vector<std::size_t> episode(rate.size());
  for (std::size_t i = 0; i < episode.size(); ++i) {
    episode[i] = std::min((i + 1) * w, m.mean_rate.size());
  }
  return csv_from(rate, loss, eps, episode);
}

std::string summary_json(const SummaryRecord& summary) {
  return summary_object(summary).dump(2) + "\n";
}

std::string instances_json(const std::vector<BaselineInstance>& instances) {
  json arr = json::array();
  for (const BaselineInstance& inst : instances) {
    arr.push_back({{"episode", inst.episode},
                   {"slot", inst.slot},
                   {"power_w", inst.power_w},
                   {"sum_rate", inst.sum_rate}});
  }
  return arr.dump() + "\n";
}

std::string comparison_json(const std::vector<ComparisonSeries>& series,
                            const ExperimentConfig& base) {
  json j;
  j["algorithm"] = std::string(to_string(base.algorithm));
  j["seed"] = base.seed;
  j["episodes"] = base.episodes;
  j["smoothing_window"] = base.smoothing_window;
  j["final_window"] = base.final_window;
  json arr = json::array();
  for (const ComparisonSeries& s : series) {
    json item;
    item["label"] = s.label;
    item["mode"] = std::string(to_string(s.mode));
    item["agg_period"] = s.agg_period ? json(*s.agg_period) : json(nullptr);
    item["curve"] = s.curve;
    item["final_mean"] = s.final_mean;
    item["summary"] = summary_object(s.summary);
    arr.push_back(std::move(item));
  }
  j["series"] = std::move(arr);
  return j.dump(2) + "\n";
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace fdrl
