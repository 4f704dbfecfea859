#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "psim/analysis.hpp"
#include "psim/ecm.hpp"
#include "psim/environment.hpp"

namespace psim {

struct HoldoutPair {
  SetupId setup = 0;
  int experiment = 0;
};

struct TrainConfig {
  long long total_rounds = 5'000'000;
  long long curve_window = 10'000;
  long long eval_interval = 0;  // 0: total_rounds / 500, at least 1
  std::optional<HoldoutPair> holdout;
  int ensemble_size = 1;
  std::uint64_t base_seed = 0;

  long long effective_eval_interval() const {
    if (eval_interval > 0) return eval_interval;
    return total_rounds / 500 > 0 ? total_rounds / 500 : 1;
  }

  /// Throws std::invalid_argument on bad counts or an out-of-range holdout.
  void validate(const Environment& env) const;
};

/// Reward rate over time; holdout_success is filled only for holdout runs
/// and is computed offline from the network, never from environment
/// feedback.
struct LearningCurve {
  std::vector<long long> rounds;
  std::vector<double> reward_rate;
  std::vector<double> holdout_success;
};

/// Trailing-window mean of a 0/1 reward stream.
class CurveRecorder {
 public:
  explicit CurveRecorder(long long window);
  void push(int reward);
  double mean() const;
  long long count() const { return count_; }

  std::vector<char> window_contents() const;  // oldest first, for checkpoints
  void restore(const std::vector<char>& contents, long long count);

 private:
  long long window_;
  long long count_ = 0;
  long long sum_ = 0;
  std::vector<char> buf_;
  std::size_t head_ = 0;
};

struct TrainResult {
  ClipNetwork net;
  LearningCurve curve;
};

/// Mid-training state hook; used by the CLI for checkpointing.
struct TrainObserver {
  // Called after every eval-interval sample with the current round.
  virtual void on_sample(long long /*round*/, const ClipNetwork& /*net*/, const Rng& /*rng*/,
                         const CurveRecorder& /*recorder*/, const LearningCurve& /*curve*/) {}
  virtual ~TrainObserver() = default;
};

/// Resume point for a previously checkpointed run.
struct TrainResumeState {
  ClipNetwork net;
  long long round = 0;
  std::string rng_state;
  std::vector<char> window;
  long long pushed = 0;
  LearningCurve curve;
};

ClipNetwork make_network(const Environment& env, Architecture arch, int num_intermediate = 0);

/// The interaction loop: sample setup, deliberate, evaluate, self-reward,
/// update; the curve is sampled every eval_interval rounds and at the final
/// round. Fully deterministic given the seed. If cfg.holdout is set, rounds
/// whose chosen prediction pertains to the holdout pair never consult
/// evaluate and proceed with reward 0, and the curve carries the offline
/// holdout success track.
///
/// Env needs: sample_setup(Rng&), evaluate(SetupId, PredictionId),
/// correct_outcome(SetupId, int).
template <class Env>
TrainResult run_training_on(const Env& env, ClipNetwork net, const AgentConfig& agent,
                            const TrainConfig& cfg, std::uint64_t seed,
                            TrainObserver* observer = nullptr,
                            const TrainResumeState* resume = nullptr);

TrainResult run_training(const Environment& env, Architecture arch, const AgentConfig& agent,
                         const TrainConfig& cfg, std::uint64_t seed);

/// run_training with a required holdout pair.
TrainResult run_generalisation(const Environment& env, Architecture arch, const AgentConfig& agent,
                               const TrainConfig& cfg, std::uint64_t seed);

struct MetricStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample std; 0 for a single agent
  std::vector<double> per_agent;
  bool single_sample = false;
};

struct EnsembleResult {
  std::vector<TrainResult> runs;
  // One estimate per agent for three-layer ensembles within the subset-scan
  // cap; empty otherwise.
  std::vector<EnvironmentEstimate> estimates;
  std::map<std::string, MetricStats> metrics;
};

/// cfg.ensemble_size independent trainings with seeds base_seed + k,
/// optionally spread over worker threads; aggregates are identical to
/// sequential execution. A failing run aborts with its seed in the message.
EnsembleResult run_ensemble(const Environment& env, Architecture arch, const AgentConfig& agent,
                            const TrainConfig& cfg, int num_threads = 1,
                            const AnalysisThresholds& thresholds = {});

/// Aggregation half of run_ensemble, for callers that drive the individual
/// trainings themselves (checkpointing, progress reporting).
EnsembleResult aggregate_runs(const Environment& env, Architecture arch, const TrainConfig& cfg,
                              const AnalysisThresholds& thresholds,
                              std::vector<TrainResult> runs);

/// Offline success probability on a holdout pair: the renormalized mass the
/// action marginal puts on the correct outcome of the holdout experiment.
double holdout_success_probability(const Environment& env, const ClipNetwork& net,
                                   const HoldoutPair& holdout);

MetricStats aggregate_metric(std::vector<double> per_agent);

// ---------------------------------------------------------------------------

namespace detail {

template <class Env>
double holdout_success_on(const Env& env, const ClipNetwork& net, const HoldoutPair& holdout) {
  const std::vector<double> marginal = action_marginal(net, holdout.setup);
  const int values = net.values_per_variable();
  const int correct = env.correct_outcome(holdout.setup, holdout.experiment);
  double mass = 0.0;
  for (int o = 0; o < values; ++o) mass += marginal[holdout.experiment * values + o];
  if (!(mass > 0.0)) return 0.0;
  return marginal[holdout.experiment * values + correct] / mass;
}

}  // namespace detail

template <class Env>
TrainResult run_training_on(const Env& env, ClipNetwork net, const AgentConfig& agent,
                            const TrainConfig& cfg, std::uint64_t seed, TrainObserver* observer,
                            const TrainResumeState* resume) {
  const long long total = cfg.total_rounds;
  const long long interval = cfg.effective_eval_interval();

  Rng rng(seed);
  CurveRecorder recorder(cfg.curve_window);
  LearningCurve curve;
  long long start = 0;
  if (resume) {
    net = resume->net;
    start = resume->round;
    rng.set_state(resume->rng_state);
    recorder.restore(resume->window, resume->pushed);
    curve = resume->curve;
  }

  DeliberationScratch scratch;
  for (long long round = start + 1; round <= total; ++round) {
    const SetupId s = env.sample_setup(rng);
    const DeliberationPath path = deliberate(net, agent, s, rng, scratch);
    int reward = 0;
    if (cfg.holdout && s == cfg.holdout->setup &&
        path.action.experiment == cfg.holdout->experiment) {
      // Held-out pair: no feedback, the round proceeds unrewarded.
    } else {
      reward = env.evaluate(s, path.action);
    }
    update(net, agent, path, reward);
    recorder.push(reward);

    if (round % interval == 0 || round == total) {
      curve.rounds.push_back(round);
      curve.reward_rate.push_back(recorder.mean());
      if (cfg.holdout) {
        curve.holdout_success.push_back(detail::holdout_success_on(env, net, *cfg.holdout));
      }
      if (observer) observer->on_sample(round, net, rng, recorder, curve);
    }
  }
  return {std::move(net), std::move(curve)};
}

}  // namespace psim
