#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "psim/training.hpp"

using namespace psim;

namespace {

// Environment wrapper that records which (setup, experiment) pairs were
// queried through evaluate().
class CountingEnvironment {
 public:
  explicit CountingEnvironment(const Environment& env) : env_(env) {}

  SetupId sample_setup(Rng& rng) const { return env_.sample_setup(rng); }
  int correct_outcome(SetupId s, int e) const { return env_.correct_outcome(s, e); }
  int evaluate(SetupId s, const PredictionId& p) const {
    queried.emplace_back(s, p.experiment);
    return env_.evaluate(s, p);
  }

  mutable std::vector<std::pair<SetupId, int>> queried;

 private:
  const Environment& env_;
};

}  // namespace

TEST_CASE("curve recorder matches a brute-force trailing mean") {
  Rng rng(77);
  for (long long window : {1, 3, 10, 64}) {
    CurveRecorder recorder(window);
    std::vector<int> rewards;
    for (int t = 0; t < 500; ++t) {
      const int r = static_cast<int>(rng.below(2));
      rewards.push_back(r);
      recorder.push(r);

      const long long n = std::min<long long>(rewards.size(), window);
      double sum = 0.0;
      for (long long k = 0; k < n; ++k) sum += rewards[rewards.size() - 1 - k];
      CHECK(recorder.mean() == doctest::Approx(sum / n).epsilon(1e-12));
    }
  }
}

TEST_CASE("curve recorder window round-trips through checkpoint state") {
  CurveRecorder a(8);
  Rng rng(5);
  for (int t = 0; t < 37; ++t) a.push(static_cast<int>(rng.below(2)));

  CurveRecorder b(8);
  b.restore(a.window_contents(), a.count());
  CHECK(b.mean() == a.mean());
  CHECK(b.count() == a.count());
  a.push(1);
  b.push(1);
  CHECK(b.mean() == a.mean());
}

TEST_CASE("zero rounds leave the network untouched and the curve empty") {
  const Environment env = Environment::build({});
  AgentConfig agent;
  TrainConfig cfg;
  cfg.total_rounds = 0;
  cfg.curve_window = 1;
  const TrainResult result = run_training(env, Architecture::three_layer, agent, cfg, 1);
  CHECK(result.net == make_network(env, Architecture::three_layer));
  CHECK(result.curve.rounds.empty());
}

TEST_CASE("training is deterministic in the seed") {
  const Environment env = Environment::build({});
  AgentConfig agent;
  agent.gamma = 1e-3;
  TrainConfig cfg;
  cfg.total_rounds = 20'000;
  cfg.curve_window = 500;

  const TrainResult a = run_training(env, Architecture::three_layer, agent, cfg, 42);
  const TrainResult b = run_training(env, Architecture::three_layer, agent, cfg, 42);
  CHECK(a.net == b.net);
  CHECK(a.curve.rounds == b.curve.rounds);
  CHECK(a.curve.reward_rate == b.curve.reward_rate);

  const TrainResult c = run_training(env, Architecture::three_layer, agent, cfg, 43);
  CHECK_FALSE(a.net == c.net);
}

TEST_CASE("curve values stay in [0, 1] and are sampled on the expected grid") {
  const Environment env = Environment::build({});
  AgentConfig agent;
  agent.gamma = 1e-3;
  TrainConfig cfg;
  cfg.total_rounds = 10'000;
  cfg.curve_window = 100;
  cfg.eval_interval = 1'000;
  const TrainResult result = run_training(env, Architecture::two_layer, agent, cfg, 3);
  REQUIRE(result.curve.rounds.size() == 10);
  CHECK(result.curve.rounds.front() == 1'000);
  CHECK(result.curve.rounds.back() == 10'000);
  for (double r : result.curve.reward_rate) {
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
  }
}

TEST_CASE("holdout rounds never consult evaluate on the held-out pair") {
  const Environment env = Environment::build({});
  const HoldoutPair holdout{0, 0};
  TrainConfig cfg;
  cfg.total_rounds = 30'000;
  cfg.curve_window = 1000;
  cfg.holdout = holdout;
  AgentConfig agent;
  agent.gamma = 1e-3;

  for (Architecture arch : {Architecture::two_layer, Architecture::three_layer}) {
    CountingEnvironment counting(env);
    const TrainResult result =
        run_training_on(counting, make_network(env, arch), agent, cfg, 11);
    CHECK_FALSE(counting.queried.empty());
    for (const auto& [s, e] : counting.queried) {
      CHECK_FALSE((s == holdout.setup && e == holdout.experiment));
    }
    CHECK_FALSE(result.curve.holdout_success.empty());
  }
}

TEST_CASE("two-layer agents stay at chance on the holdout task") {
  const Environment env = Environment::build({});
  TrainConfig cfg;
  cfg.total_rounds = 10'000;
  cfg.curve_window = 1000;
  cfg.holdout = HoldoutPair{5, 3};
  AgentConfig agent;
  agent.gamma = 3e-4;

  const TrainResult result = run_generalisation(env, Architecture::two_layer, agent, cfg, 17);
  for (double p : result.curve.holdout_success) {
    CHECK(p == doctest::Approx(1.0 / 3).epsilon(0.15));  // 1/3 +- 0.05
  }
}

TEST_CASE("an ideal abstracting network generalises above chance") {
  const Environment env = Environment::build({});
  // Hand-build the converged three-layer structure: clip 3k+v labels
  // "variable k has value v"; percepts connect to their three matching
  // labels, labels connect to the correct outcome of their variable's two
  // experiments.
  ClipNetwork net = make_network(env, Architecture::three_layer);
  const double strong = 200.0;
  for (SetupId s = 0; s < env.num_setups(); ++s) {
    const auto values = env.value_vector(s);
    for (int k = 0; k < 3; ++k) net.h1()(s, 3 * k + values[k]) = strong;
  }
  for (int k = 0; k < 3; ++k) {
    for (int v = 0; v < 3; ++v) {
      for (int e = 2 * k; e < 2 * k + 2; ++e) net.h2()(3 * k + v, 3 * e + v) = strong;
    }
  }

  // The held-out experiment shares its variable with experiment 1, which the
  // ideal network has mastered.
  const HoldoutPair holdout{4, 0};
  const double p = holdout_success_probability(env, net, holdout);
  CHECK(p > 0.9);

  SUBCASE("offline value matches Monte-Carlo frequency, boredom disabled") {
    AgentConfig agent;
    agent.boredom_threshold = 1.0;
    Rng rng(23);
    long long chose = 0, correct = 0;
    const int correct_outcome = env.correct_outcome(holdout.setup, holdout.experiment);
    for (int k = 0; k < 100'000; ++k) {
      const DeliberationPath path = deliberate(net, agent, holdout.setup, rng);
      if (path.action.experiment == holdout.experiment) {
        ++chose;
        if (path.action.outcome == correct_outcome) ++correct;
      }
    }
    REQUIRE(chose > 0);
    const double freq = static_cast<double>(correct) / static_cast<double>(chose);
    const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(chose));
    CHECK(std::abs(freq - p) <= 3.0 * sigma + 1e-9);
  }
}

TEST_CASE("ensembles aggregate deterministically and in parallel") {
  const Environment env = Environment::build({});
  AgentConfig agent;
  agent.gamma = 1e-3;
  TrainConfig cfg;
  cfg.total_rounds = 5'000;
  cfg.curve_window = 500;
  cfg.ensemble_size = 4;
  cfg.base_seed = 100;

  const EnsembleResult sequential = run_ensemble(env, Architecture::two_layer, agent, cfg, 1);
  const EnsembleResult repeated = run_ensemble(env, Architecture::two_layer, agent, cfg, 1);
  const EnsembleResult parallel = run_ensemble(env, Architecture::two_layer, agent, cfg, 2);

  REQUIRE(sequential.runs.size() == 4);
  const auto& base = sequential.metrics.at("final_reward_rate");
  CHECK(base.per_agent == repeated.metrics.at("final_reward_rate").per_agent);
  CHECK(base.per_agent == parallel.metrics.at("final_reward_rate").per_agent);
  CHECK(base.mean == parallel.metrics.at("final_reward_rate").mean);
  CHECK(base.stddev == parallel.metrics.at("final_reward_rate").stddev);
  for (int k = 0; k < 4; ++k) CHECK(sequential.runs[k].net == parallel.runs[k].net);

  SUBCASE("single-agent ensembles report zero deviation, flagged") {
    cfg.ensemble_size = 1;
    const EnsembleResult single = run_ensemble(env, Architecture::two_layer, agent, cfg, 1);
    const auto& stats = single.metrics.at("final_reward_rate");
    CHECK(stats.stddev == 0.0);
    CHECK(stats.single_sample);
  }
}

TEST_CASE("training config validation") {
  const Environment env = Environment::build({});
  TrainConfig cfg;
  cfg.curve_window = 0;
  CHECK_THROWS_AS(cfg.validate(env), std::invalid_argument);
  cfg = {};
  cfg.curve_window = cfg.total_rounds + 1;
  CHECK_THROWS_AS(cfg.validate(env), std::invalid_argument);
  cfg = {};
  cfg.holdout = HoldoutPair{27, 0};
  CHECK_THROWS_AS(cfg.validate(env), std::invalid_argument);
  cfg = {};
  cfg.holdout = HoldoutPair{0, 6};
  CHECK_THROWS_AS(cfg.validate(env), std::invalid_argument);
  cfg = {};
  cfg.ensemble_size = 0;
  CHECK_THROWS_AS(cfg.validate(env), std::invalid_argument);
  CHECK_THROWS_AS(run_generalisation(env, Architecture::two_layer, AgentConfig{}, TrainConfig{}, 0),
                  std::invalid_argument);
}

TEST_CASE("resume from a checkpoint reproduces the uninterrupted run") {
  const Environment env = Environment::build({});
  AgentConfig agent;
  agent.gamma = 1e-3;
  TrainConfig cfg;
  cfg.total_rounds = 6'000;
  cfg.curve_window = 200;
  cfg.eval_interval = 1'000;

  struct Capture : TrainObserver {
    long long at_round = 3'000;
    TrainResumeState state;
    bool captured = false;
    void on_sample(long long round, const ClipNetwork& net, const Rng& rng,
                   const CurveRecorder& recorder, const LearningCurve& curve) override {
      if (round != at_round) return;
      state.net = net;
      state.round = round;
      state.rng_state = rng.state();
      state.window = recorder.window_contents();
      state.pushed = recorder.count();
      state.curve = curve;
      captured = true;
    }
  } capture;

  const ClipNetwork fresh = make_network(env, Architecture::three_layer);
  const TrainResult straight = run_training_on(env, fresh, agent, cfg, 9, &capture);
  REQUIRE(capture.captured);

  const TrainResult resumed = run_training_on(env, fresh, agent, cfg, 9, nullptr, &capture.state);
  CHECK(resumed.net == straight.net);
  CHECK(resumed.curve.rounds == straight.curve.rounds);
  CHECK(resumed.curve.reward_rate == straight.curve.reward_rate);
}
