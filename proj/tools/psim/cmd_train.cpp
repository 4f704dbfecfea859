#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>

#include "commands.hpp"
#include "psim/csv.hpp"
#include "psim/snapshot.hpp"

namespace psim::cli {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

namespace fs = std::filesystem;

fs::path checkpoint_snap(const fs::path& dir, int agent) {
  return dir / ("agent" + std::to_string(agent) + ".snap");
}
fs::path checkpoint_state(const fs::path& dir, int agent) {
  return dir / ("agent" + std::to_string(agent) + ".state.json");
}

// Writes snapshot + loop state at sample points, every `interval` rounds.
class CheckpointWriter : public TrainObserver {
 public:
  CheckpointWriter(fs::path dir, int agent, const AgentConfig& agent_cfg, long long interval,
                   long long total)
      : dir_(std::move(dir)), agent_(agent), agent_cfg_(agent_cfg), interval_(interval) {
    next_ = interval_;
    total_ = total;
  }

  void on_sample(long long round, const ClipNetwork& net, const Rng& rng,
                 const CurveRecorder& recorder, const LearningCurve& curve) override {
    if (round < next_ || round >= total_) return;
    next_ += interval_ * ((round - next_) / interval_ + 1);
    save_snapshot_file(net, agent_cfg_, checkpoint_snap(dir_, agent_).string());

    ordered_json state;
    state["round"] = round;
    state["rng_state"] = rng.state();
    std::string window;
    for (char r : recorder.window_contents()) window.push_back(r ? '1' : '0');
    state["window"] = window;
    state["pushed"] = recorder.count();
    state["curve_rounds"] = curve.rounds;
    state["curve_reward_rate"] = curve.reward_rate;
    state["curve_holdout_success"] = curve.holdout_success;
    auto os = open_out(checkpoint_state(dir_, agent_));
    os << state.dump() << '\n';
  }

 private:
  fs::path dir_;
  int agent_;
  AgentConfig agent_cfg_;
  long long interval_;
  long long next_;
  long long total_;
};

std::optional<TrainResumeState> load_checkpoint(const fs::path& dir, int agent) {
  const fs::path snap_path = checkpoint_snap(dir, agent);
  const fs::path state_path = checkpoint_state(dir, agent);
  if (!fs::exists(snap_path) || !fs::exists(state_path)) return std::nullopt;

  TrainResumeState resume;
  resume.net = load_snapshot_file(snap_path.string()).net;
  std::ifstream is(state_path);
  if (!is) throw IoError("cannot open checkpoint state: " + state_path.string());
  json state = json::parse(is);
  resume.round = state.at("round").get<long long>();
  resume.rng_state = state.at("rng_state").get<std::string>();
  for (char c : state.at("window").get<std::string>()) {
    resume.window.push_back(c == '1' ? 1 : 0);
  }
  resume.pushed = state.at("pushed").get<long long>();
  resume.curve.rounds = state.at("curve_rounds").get<std::vector<long long>>();
  resume.curve.reward_rate = state.at("curve_reward_rate").get<std::vector<double>>();
  resume.curve.holdout_success = state.at("curve_holdout_success").get<std::vector<double>>();
  return resume;
}

}  // namespace

// Shared by cmd_train and cmd_generalize: trains one ensemble with optional
// checkpointing and writes curves + snapshots + summary metrics.
EnsembleResult train_ensemble_to_dir(const RunSpec& spec, const Environment& env,
                                     Architecture arch, const TrainConfig& train_cfg,
                                     const fs::path& out_dir, const std::string& file_prefix,
                                     long long checkpoint_every, bool resume,
                                     std::vector<std::string>& outputs) {
  spec.agent.validate(env.config().values_per_variable);
  train_cfg.validate(env);

  const int n = train_cfg.ensemble_size;
  const fs::path checkpoint_dir = out_dir / "checkpoints";
  long long interval = checkpoint_every;
  if (interval < 0) {
    interval = train_cfg.total_rounds >= 10'000'000 ? train_cfg.total_rounds / 10 : 0;
  }
  if (interval > 0 || resume) ensure_dir(checkpoint_dir);

  std::vector<TrainResult> runs(n);
  std::vector<std::string> failures(n);
  std::atomic<int> next{0};
  auto worker = [&]() {
    while (true) {
      const int k = next.fetch_add(1);
      if (k >= n) return;
      try {
        std::optional<TrainResumeState> resume_state;
        if (resume) resume_state = load_checkpoint(checkpoint_dir, k);
        std::optional<CheckpointWriter> writer;
        if (interval > 0) {
          writer.emplace(checkpoint_dir, k, spec.agent, interval, train_cfg.total_rounds);
        }
        runs[k] = run_training_on(env, make_network(env, arch, spec.num_intermediate),
                                  spec.agent, train_cfg, train_cfg.base_seed + k,
                                  writer ? &*writer : nullptr,
                                  resume_state ? &*resume_state : nullptr);
      } catch (const std::exception& e) {
        failures[k] = e.what();
      }
    }
  };
  const int workers = std::clamp(spec.threads, 1, n);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (int k = 0; k < n; ++k) {
    if (!failures[k].empty()) {
      throw std::runtime_error("ensemble member with seed " +
                               std::to_string(train_cfg.base_seed + k) +
                               " failed: " + failures[k]);
    }
  }

  for (int k = 0; k < n; ++k) {
    const std::string curve_name = file_prefix + "curve_agent" + std::to_string(k) + ".csv";
    auto curve_os = open_out(out_dir / curve_name);
    write_curve_csv(curve_os, runs[k].curve);
    outputs.push_back(curve_name);

    const std::string snap_name = file_prefix + "agent" + std::to_string(k) + ".snap";
    save_snapshot_file(runs[k].net, spec.agent, (out_dir / snap_name).string());
    outputs.push_back(snap_name);
  }
  return aggregate_runs(env, arch, train_cfg, spec.analysis, std::move(runs));
}

int cmd_train(const TrainOptions& options) {
  const fs::path out_dir(options.out_dir);
  ensure_dir(out_dir);

  const Environment env = Environment::build(options.spec.env);
  std::vector<std::string> outputs;

  if (options.dump_env_table) {
    auto table_os = open_out(out_dir / "env_table.csv");
    env.write_setup_table(table_os);
    outputs.push_back("env_table.csv");
  }

  const EnsembleResult result =
      train_ensemble_to_dir(options.spec, env, options.spec.architecture, options.spec.train,
                            out_dir, "", options.checkpoint_every, options.resume, outputs);

  ordered_json summary;
  summary["metrics"] = ordered_json::object();
  for (const auto& [name, stats] : result.metrics) {
    summary["metrics"][name] = metric_to_json(stats);
  }
  if (!result.estimates.empty()) {
    ordered_json estimates = ordered_json::array();
    for (const auto& est : result.estimates) estimates.push_back(estimate_to_json(est));
    summary["estimates"] = estimates;
  }
  auto summary_os = open_out(out_dir / "summary.json");
  summary_os << summary.dump(2) << '\n';
  outputs.push_back("summary.json");

  write_manifest(options.spec, "train", out_dir, outputs);
  return kExitOk;
}

}  // namespace psim::cli
