#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fdrl/agents.hpp"
#include "fdrl/channel.hpp"
#include "fdrl/federation.hpp"
#include "fdrl/netsim.hpp"

namespace fdrl {

// Sub-stream identifiers under the experiment seed.
inline constexpr std::uint64_t kTrainEnvStream = 1;
inline constexpr std::uint64_t kInitWeightsStream = 2;
inline constexpr std::uint64_t kEvalEnvStream = 3;

struct ExperimentConfig {
  TopologyConfig topology;
  EnvConfig env;
  AgentConfig agent;
  TrainingMode mode = TrainingMode::federated;
  std::size_t agg_period = 100;
  Algorithm algorithm = Algorithm::pg;
  std::size_t episodes = 2000;
  std::size_t eval_episodes = 200;
  std::uint64_t seed = 1;
  std::size_t smoothing_window = 100;
  std::size_t final_window = 500;  // episodes averaged for final-window means
  std::filesystem::path out_dir = "out";
  bool timing = false;             // record wall-clock decision latency
  double server_latency_s = 0.0;   // added to centralized decision latency
  bool checkpoints = false;        // write per-round aggregation payloads
};

// Flat "key = value" grammar: one setting per line, '#' starts a comment,
// blank lines ignored. Keys are the names returned by config_keys().
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path);
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);
// Throws ConfigError naming the first invalid field.
void validate(const ExperimentConfig& config);
const std::vector<std::string>& config_keys();
std::string to_config_text(const ExperimentConfig& config);

// Non-overlapping block means; a trailing partial block is averaged over its
// actual length.
std::vector<double> smooth(std::span<const double> series, std::size_t window);

struct SummaryRecord {
  std::string algorithm;
  double mean_rate_per_user = 0.0;
  double std_rate_per_user = 0.0;
  std::optional<double> decision_latency_s;  // only with timing enabled
  double comm_overhead = 0.0;
};

struct EvalResult {
  std::vector<double> episode_rates;  // mean per-user rate of each episode
  double mean = 0.0;
  double stddev = 0.0;
  std::optional<double> decision_latency_s;
};

struct BaselineInstance {
  std::size_t episode = 0;
  std::size_t slot = 0;
  std::vector<double> power_w;  // flat user order
  double sum_rate = 0.0;
};

struct ExperimentResult {
  RunMetrics metrics;  // empty series for baselines
  EvalResult eval;
  SummaryRecord summary;
  std::vector<BaselineInstance> instances;  // baselines only
};

// Label such as "FDQN", "DPG-Dist", "WMMSE".
std::string algorithm_label(Algorithm algo, TrainingMode mode);

ExperimentResult run_experiment(const ExperimentConfig& config);
ExperimentResult run_baseline(const ExperimentConfig& config);

struct ComparisonSeries {
  std::string label;
  TrainingMode mode = TrainingMode::distributed;
  std::optional<std::size_t> agg_period;
  std::vector<double> curve;  // smoothed
  double final_mean = 0.0;
  SummaryRecord summary;
};

std::vector<ComparisonSeries> compare_modes(const ExperimentConfig& base);

// Artifact writers. Each throws IoError on failure.
std::string curve_csv(const ExperimentResult& result, const ExperimentConfig& config);
std::string smoothed_curve_csv(const ExperimentResult& result, const ExperimentConfig& config);
std::string summary_json(const SummaryRecord& summary);
std::string instances_json(const std::vector<BaselineInstance>& instances);
std::string comparison_json(const std::vector<ComparisonSeries>& series,
                            const ExperimentConfig& base);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace fdrl
