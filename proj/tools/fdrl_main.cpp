// fdrl: train, compare and benchmark power-control agents.
//
//   fdrl train    --config exp.cfg [--algo dqn|pg] [--mode M] [--agg-period N] [--seed N] [--out DIR]
//   fdrl compare  --config exp.cfg --out DIR
//   fdrl baseline --algo wmmse|maxpower --config exp.cfg [--out DIR]
//
// Any configuration key can also be overridden with --<key> VALUE.
// Exit codes: 0 success, 1 configuration error, 2 I/O error.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "fdrl/error.hpp"
#include "fdrl/experiment.hpp"

namespace {

constexpr int kConfigError = 1;
constexpr int kIoError = 2;

struct CommonArgs {
  std::string config_path;
  std::optional<std::string> algo;
  std::optional<std::string> mode;
  std::optional<std::string> agg_period;
  std::optional<std::string> seed;
  std::optional<std::string> out;
  std::map<std::string, std::string> overrides;
};

void add_overrides(CLI::App* cmd, CommonArgs& args) {
  for (const std::string& key : fdrl::config_keys()) {
    if (cmd->get_option_no_throw("--" + key) != nullptr) continue;  // explicit flag exists
    cmd->add_option_function<std::string>(
           "--" + key, [&args, key](const std::string& v) { args.overrides[key] = v; },
           "override config key '" + key + "'")
        ->group("Config overrides");
  }
}

fdrl::ExperimentConfig resolve(const CommonArgs& args) {
  fdrl::ExperimentConfig config = fdrl::load_config(args.config_path);
  for (const auto& [key, value] : args.overrides) fdrl::apply_setting(config, key, value);
  if (args.algo) fdrl::apply_setting(config, "algorithm", *args.algo);
  if (args.mode) fdrl::apply_setting(config, "mode", *args.mode);
  if (args.agg_period) fdrl::apply_setting(config, "agg_period", *args.agg_period);
  if (args.seed) fdrl::apply_setting(config, "seed", *args.seed);
  if (args.out) fdrl::apply_setting(config, "out_dir", *args.out);
  fdrl::validate(config);
  return config;
}

void print_summary(const fdrl::SummaryRecord& s) {
  std::printf("%-12s mean %.4f  std %.4f  overhead %.4g bit/s/Hz per user\n", s.algorithm.c_str(),
              s.mean_rate_per_user, s.std_rate_per_user, s.comm_overhead);
}

int run_train(const CommonArgs& args) {
  const fdrl::ExperimentConfig config = resolve(args);
  if (!fdrl::is_learning(config.algorithm)) {
    throw fdrl::ConfigError("algorithm", "train expects dqn or pg; use 'baseline' for wmmse/maxpower");
  }
  const fdrl::ExperimentResult result = fdrl::run_experiment(config);
  fdrl::write_text(config.out_dir / "curve.csv", fdrl::curve_csv(result, config));
  fdrl::write_text(config.out_dir / "curve_smoothed.csv", fdrl::smoothed_curve_csv(result, config));
  fdrl::write_text(config.out_dir / "summary.json", fdrl::summary_json(result.summary));
  fdrl::write_text(config.out_dir / "config.txt", fdrl::to_config_text(config));
  print_summary(result.summary);
  return 0;
}

int run_compare(const CommonArgs& args) {
  const fdrl::ExperimentConfig config = resolve(args);
  if (!fdrl::is_learning(config.algorithm)) {
    throw fdrl::ConfigError("algorithm", "compare expects dqn or pg");
  }
  const auto series = fdrl::compare_modes(config);
  fdrl::write_text(config.out_dir / "comparison.json", fdrl::comparison_json(series, config));
  for (const auto& s : series) {
    std::printf("%-14s final-window mean %.4f  overhead %.4g\n", s.label.c_str(), s.final_mean,
                s.summary.comm_overhead);
  }
  return 0;
}

int run_baseline(const CommonArgs& args) {
  const fdrl::ExperimentConfig config = resolve(args);
  if (fdrl::is_learning(config.algorithm)) {
    throw fdrl::ConfigError("algorithm", "baseline expects wmmse or maxpower");
  }
  const fdrl::ExperimentResult result = fdrl::run_baseline(config);
  fdrl::write_text(config.out_dir / "curve.csv", fdrl::curve_csv(result, config));
  fdrl::write_text(config.out_dir / "summary.json", fdrl::summary_json(result.summary));
  fdrl::write_text(config.out_dir / "instances.json", fdrl::instances_json(result.instances));
  print_summary(result.summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated deep RL for multi-cell downlink power control"};
  app.require_subcommand(1);

  CommonArgs train_args;
  CLI::App* train = app.add_subcommand("train", "train dqn/pg agents and evaluate them");
  train->add_option("--config", train_args.config_path, "config file")->required();
  train->add_option("--algo", train_args.algo, "dqn|pg");
  train->add_option("--mode", train_args.mode, "federated|distributed|centralized");
  train->add_option("--agg-period", train_args.agg_period, "aggregation period (episodes, or inf)");
  train->add_option("--seed", train_args.seed, "master seed");
  train->add_option("--out", train_args.out, "output directory");
  add_overrides(train, train_args);

  CommonArgs compare_args;
  CLI::App* compare = app.add_subcommand("compare", "distributed vs centralized vs federated sweep");
  compare->add_option("--config", compare_args.config_path, "config file")->required();
  compare->add_option("--algo", compare_args.algo, "dqn|pg");
  compare->add_option("--seed", compare_args.seed, "master seed");
  compare->add_option("--out", compare_args.out, "output directory")->required();
  add_overrides(compare, compare_args);

  CommonArgs baseline_args;
  CLI::App* baseline = app.add_subcommand("baseline", "evaluate a non-learning allocator");
  baseline->add_option("--algo", baseline_args.algo, "wmmse|maxpower")->required();
  baseline->add_option("--config", baseline_args.config_path, "config file")->required();
  baseline->add_option("--seed", baseline_args.seed, "master seed");
  baseline->add_option("--out", baseline_args.out, "output directory");
  add_overrides(baseline, baseline_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*train) return run_train(train_args);
    if (*compare) return run_compare(compare_args);
    if (*baseline) return run_baseline(baseline_args);
  } catch (const fdrl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const fdrl::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return 0;
}
