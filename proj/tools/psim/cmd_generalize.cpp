#include <filesystem>

#include "commands.hpp"

namespace psim::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

EnsembleResult train_ensemble_to_dir(const RunSpec& spec, const Environment& env,
                                     Architecture arch, const TrainConfig& train_cfg,
                                     const fs::path& out_dir, const std::string& file_prefix,
                                     long long checkpoint_every, bool resume,
                                     std::vector<std::string>& outputs);

int cmd_generalize(const GeneralizeOptions& options) {
  RunSpec spec = options.spec;
  if (!spec.train.holdout) spec.train.holdout = HoldoutPair{0, 0};

  const fs::path out_dir(options.out_dir);
  ensure_dir(out_dir);
  const Environment env = Environment::build(spec.env);
  std::vector<std::string> outputs;

  // Holdout-success curves for both architectures, as in the comparison
  // figures: the three-layer agents transfer through their labels, the
  // two-layer baseline stays at chance.
  const EnsembleResult three = train_ensemble_to_dir(
      spec, env, Architecture::three_layer, spec.train, out_dir, "threelayer_", 0, false,
      outputs);

  TrainConfig two_cfg = spec.train;
  two_cfg.total_rounds = options.twolayer_rounds;
  two_cfg.curve_window = options.twolayer_window;
  two_cfg.eval_interval = 0;
  const EnsembleResult two = train_ensemble_to_dir(
      spec, env, Architecture::two_layer, two_cfg, out_dir, "twolayer_", 0, false, outputs);

  ordered_json summary;
  summary["holdout"] = {{"setup", spec.train.holdout->setup},
                        {"experiment", spec.train.holdout->experiment}};
  for (const auto* side : {&three, &two}) {
    ordered_json metrics = ordered_json::object();
    for (const auto& [name, stats] : side->metrics) metrics[name] = metric_to_json(stats);
    summary[side == &three ? "three_layer" : "two_layer"] = metrics;
  }
  summary["holdout_success_gap"] = three.metrics.at("final_holdout_success").mean -
                                   two.metrics.at("final_holdout_success").mean;
  auto os = open_out(out_dir / "summary.json");
  os << summary.dump(2) << '\n';
  outputs.push_back("summary.json");

  write_manifest(spec, "generalize", out_dir, outputs,
                 ordered_json{{"twolayer_rounds", options.twolayer_rounds}});
  return kExitOk;
}

}  // namespace psim::cli
