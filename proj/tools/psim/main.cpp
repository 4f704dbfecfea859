#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "psim/snapshot.hpp"

namespace {

using namespace psim;
using namespace psim::cli;

// Flags shared by the commands that resolve a full run configuration.
// Resolution order: built-in defaults, then --preset, then --config, then
// explicit flags.
struct SpecFlags {
  std::string preset;
  std::string config;
  int variables = 0;
  int values = 0;
  int experiments_per_variable = 0;
  std::uint64_t env_seed = 0;
  bool permute_experiments = false;
  std::string arch;
  int intermediate = 0;
  double gamma = 0;
  double reward = 0;
  double beta = 0;
  int max_redraws = 0;
  long long rounds = 0;
  long long window = 0;
  long long eval_interval = 0;
  int ensemble = 0;
  std::uint64_t seed = 0;
  double exh_min = 0;
  double excl_min = 0;
  double tau = 0;
  std::string correlation;
  int subset_cap = 0;
  int threads = 1;

  CLI::Option* o_variables = nullptr;
  CLI::Option* o_values = nullptr;
  CLI::Option* o_epv = nullptr;
  CLI::Option* o_env_seed = nullptr;
  CLI::Option* o_permute = nullptr;
  CLI::Option* o_arch = nullptr;
  CLI::Option* o_intermediate = nullptr;
  CLI::Option* o_gamma = nullptr;
  CLI::Option* o_reward = nullptr;
  CLI::Option* o_beta = nullptr;
  CLI::Option* o_max_redraws = nullptr;
  CLI::Option* o_rounds = nullptr;
  CLI::Option* o_window = nullptr;
  CLI::Option* o_eval = nullptr;
  CLI::Option* o_ensemble = nullptr;
  CLI::Option* o_seed = nullptr;
  CLI::Option* o_exh_min = nullptr;
  CLI::Option* o_excl_min = nullptr;
  CLI::Option* o_tau = nullptr;
  CLI::Option* o_correlation = nullptr;
  CLI::Option* o_subset_cap = nullptr;

  void add_to(CLI::App* cmd, bool with_training = true) {
    cmd->add_option("--preset", preset, "Start from a named experiment preset");
    cmd->add_option("--config", config, "JSON config file overlaying the preset/defaults");
    o_variables = cmd->add_option("--variables", variables, "Hidden variables");
    o_values = cmd->add_option("--values", values, "Values per variable");
    o_epv = cmd->add_option("--experiments-per-variable", experiments_per_variable,
                            "Experiments testing each variable");
    o_env_seed = cmd->add_option("--env-seed", env_seed, "Setup-label permutation seed");
    o_permute = cmd->add_flag("--permute-experiments", permute_experiments,
                              "Shuffle the experiment-to-variable assignment");
    if (with_training) {
      o_arch = cmd->add_option("--arch", arch, "Agent architecture (two_layer|three_layer)")
                   ->check(CLI::IsMember({"two_layer", "three_layer"}));
      o_intermediate =
          cmd->add_option("--intermediate", intermediate, "Intermediate clips (0 = auto)");
      o_gamma = cmd->add_option("--gamma", gamma, "Forgetting rate");
      o_reward = cmd->add_option("--reward", reward, "Reward magnitude R");
      o_beta = cmd->add_option("--beta", beta, "Boredom threshold");
      o_max_redraws = cmd->add_option("--max-redraws", max_redraws, "Boredom redraw cap");
      o_rounds = cmd->add_option("--rounds", rounds, "Interaction rounds T");
      o_window = cmd->add_option("--window", window, "Trailing reward-rate window");
      o_eval = cmd->add_option("--eval-interval", eval_interval,
                               "Rounds between curve samples (0 = T/500)");
      o_ensemble = cmd->add_option("--ensemble", ensemble, "Number of independent agents");
      o_seed = cmd->add_option("--seed", seed, "Base seed (agent k uses seed + k)");
    }
    o_exh_min = cmd->add_option("--exh-min", exh_min, "Good-subset exhaustivity cut");
    o_excl_min = cmd->add_option("--excl-min", excl_min, "Good-subset exclusivity cut");
    o_tau = cmd->add_option("--tau", tau, "Correlation-block threshold");
    o_correlation = cmd->add_option("--correlation", correlation, "pearson|cosine")
                        ->check(CLI::IsMember({"pearson", "cosine"}));
    o_subset_cap = cmd->add_option("--subset-cap", subset_cap, "Subset enumeration guard");
    cmd->add_option("--threads", threads, "Worker threads for ensembles/scans");
  }

  RunSpec resolve() const {
    RunSpec spec;
    if (!preset.empty()) apply_preset(spec, preset);
    if (!config.empty()) apply_config_file(spec, config);
    if (o_variables && *o_variables) spec.env.num_variables = variables;
    if (o_values && *o_values) spec.env.values_per_variable = values;
    if (o_epv && *o_epv) spec.env.experiments_per_variable = experiments_per_variable;
    if (o_env_seed && *o_env_seed) spec.env.seed = env_seed;
    if (o_permute && *o_permute) spec.env.permute_experiments = permute_experiments;
    if (o_arch && *o_arch) {
      spec.architecture =
          arch == "two_layer" ? Architecture::two_layer : Architecture::three_layer;
    }
    if (o_intermediate && *o_intermediate) spec.num_intermediate = intermediate;
    if (o_gamma && *o_gamma) spec.agent.gamma = gamma;
    if (o_reward && *o_reward) spec.agent.reward_magnitude = reward;
    if (o_beta && *o_beta) spec.agent.boredom_threshold = beta;
    if (o_max_redraws && *o_max_redraws) spec.agent.max_redraws = max_redraws;
    if (o_rounds && *o_rounds) spec.train.total_rounds = rounds;
    if (o_window && *o_window) spec.train.curve_window = window;
    if (o_eval && *o_eval) spec.train.eval_interval = eval_interval;
    if (o_ensemble && *o_ensemble) spec.train.ensemble_size = ensemble;
    if (o_seed && *o_seed) spec.train.base_seed = seed;
    if (o_exh_min && *o_exh_min) spec.analysis.exh_min = exh_min;
    if (o_excl_min && *o_excl_min) spec.analysis.excl_min = excl_min;
    if (o_tau && *o_tau) spec.analysis.block_tau = tau;
    if (o_correlation && *o_correlation) {
      spec.analysis.method =
          correlation == "cosine" ? CorrelationMethod::cosine : CorrelationMethod::pearson;
    }
    if (o_subset_cap && *o_subset_cap) spec.analysis.subset_cap = subset_cap;
    spec.threads = threads;
    return spec;
  }
};

int dispatch(int argc, char** argv) {
  CLI::App app{"Projective-simulation agents on hidden-variable prediction tasks"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "Train an agent or ensemble, write curves/snapshots");
  SpecFlags train_flags;
  train_flags.add_to(train);
  TrainOptions train_options;
  train->add_option("--out", train_options.out_dir, "Output directory");
  train->add_option("--checkpoint-every", train_options.checkpoint_every,
                    "Checkpoint interval in rounds (-1 auto, 0 off)");
  train->add_flag("--resume", train_options.resume, "Continue from checkpoints in --out");
  train->add_flag("--dump-env-table", train_options.dump_env_table,
                  "Also write the hidden setup table (debugging only)");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Identify variables in a trained snapshot");
  AnalyzeOptions analyze_options;
  analyze->add_option("--snapshot", analyze_options.snapshot_path, "Snapshot file")->required();
  analyze->add_option("--out", analyze_options.out_dir, "Output directory");
  SpecFlags analyze_flags;
  analyze_flags.add_to(analyze, false);

  // generalize
  auto* generalize =
      app.add_subcommand("generalize", "Hold out one setup-experiment pair and track transfer");
  SpecFlags gen_flags;
  gen_flags.add_to(generalize);
  GeneralizeOptions gen_options;
  int holdout_setup = 0, holdout_experiment = 0;
  generalize->add_option("--holdout-setup", holdout_setup, "Held-out setup label");
  generalize->add_option("--holdout-experiment", holdout_experiment, "Held-out experiment");
  generalize->add_option("--twolayer-rounds", gen_options.twolayer_rounds,
                         "Rounds for the two-layer baseline");
  generalize->add_option("--out", gen_options.out_dir, "Output directory");

  // scan
  auto* scan = app.add_subcommand("scan", "Run ensembles across environment presets");
  ScanOptions scan_options;
  scan->add_option("--presets", scan_options.presets, "Preset names")->delimiter(',');
  scan->add_option("--sweep", scan_options.sweep_file, "JSON sweep file");
  scan->add_option("--ensemble", scan_options.ensemble_size, "Agents per preset (0 = preset)");
  scan->add_option("--seed", scan_options.base_seed, "Base seed");
  scan->add_option("--threads", scan_options.threads, "Worker threads");
  scan->add_option("--out", scan_options.out_dir, "Output directory");

  // env
  auto* env = app.add_subcommand("env", "Export an environment's hidden setup table (debugging)");
  SpecFlags env_flags;
  env_flags.add_to(env, false);
  EnvOptions env_options;
  env->add_option("--out", env_options.out_path, "Output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*train) {
      train_options.spec = train_flags.resolve();
      return cmd_train(train_options);
    }
    if (*analyze) {
      const RunSpec spec = analyze_flags.resolve();
      analyze_options.thresholds = spec.analysis;
      analyze_options.threads = spec.threads;
      return cmd_analyze(analyze_options);
    }
    if (*generalize) {
      gen_options.spec = gen_flags.resolve();
      HoldoutPair pair = gen_options.spec.train.holdout.value_or(HoldoutPair{0, 0});
      if (generalize->count("--holdout-setup")) pair.setup = holdout_setup;
      if (generalize->count("--holdout-experiment")) pair.experiment = holdout_experiment;
      gen_options.spec.train.holdout = pair;
      return cmd_generalize(gen_options);
    }
    if (*scan) return cmd_scan(scan_options);
    if (*env) {
      env_options.spec = env_flags.resolve();
      return cmd_env(env_options);
    }
  } catch (const ConfigError& e) {
    std::cerr << "psim: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "psim: i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const SnapshotError& e) {
    std::cerr << "psim: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "psim: invalid configuration: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "psim: error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) { return dispatch(argc, argv); }
