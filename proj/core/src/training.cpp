#include "psim/training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace psim {

void TrainConfig::validate(const Environment& env) const {
  if (total_rounds < 0) throw std::invalid_argument("TrainConfig: total_rounds must be >= 0");
  if (curve_window < 1) throw std::invalid_argument("TrainConfig: curve_window must be >= 1");
  if (total_rounds > 0 && curve_window > total_rounds) {
    throw std::invalid_argument("TrainConfig: curve_window must not exceed total_rounds");
  }
  if (eval_interval < 0) throw std::invalid_argument("TrainConfig: eval_interval must be >= 0");
  if (ensemble_size < 1) throw std::invalid_argument("TrainConfig: ensemble_size must be >= 1");
  if (holdout) {
    if (holdout->setup < 0 || holdout->setup >= env.num_setups()) {
      throw std::invalid_argument("TrainConfig: holdout setup out of range");
    }
    if (holdout->experiment < 0 || holdout->experiment >= env.num_experiments()) {
      throw std::invalid_argument("TrainConfig: holdout experiment out of range");
    }
  }
}

CurveRecorder::CurveRecorder(long long window) : window_(window) {
  if (window < 1) throw std::invalid_argument("CurveRecorder: window must be >= 1");
  buf_.assign(static_cast<std::size_t>(window), 0);
}

void CurveRecorder::push(int reward) {
  if (count_ >= window_) sum_ -= buf_[head_];
  buf_[head_] = static_cast<char>(reward);
  sum_ += reward;
  head_ = (head_ + 1) % buf_.size();
  ++count_;
}

double CurveRecorder::mean() const {
  const long long n = std::min(count_, window_);
  return n == 0 ? 0.0 : static_cast<double>(sum_) / static_cast<double>(n);
}

std::vector<char> CurveRecorder::window_contents() const {
  const long long n = std::min(count_, window_);
  std::vector<char> out(static_cast<std::size_t>(n));
  // head_ points at the slot after the newest entry.
  const std::size_t size = buf_.size();
  for (long long k = 0; k < n; ++k) {
    out[static_cast<std::size_t>(n - 1 - k)] = buf_[(head_ + size - 1 - k) % size];
  }
  return out;
}

void CurveRecorder::restore(const std::vector<char>& contents, long long count) {
  if (static_cast<long long>(contents.size()) > window_ ||
      static_cast<long long>(contents.size()) > count) {
    throw std::invalid_argument("CurveRecorder::restore: inconsistent window contents");
  }
  buf_.assign(static_cast<std::size_t>(window_), 0);
  head_ = 0;
  sum_ = 0;
  count_ = 0;
  for (char r : contents) push(r);
  count_ = count;
}

ClipNetwork make_network(const Environment& env, Architecture arch, int num_intermediate) {
  if (arch == Architecture::two_layer) {
    return ClipNetwork::two_layer(env.num_setups(), env.num_experiments(),
                                  env.config().values_per_variable);
  }
  if (num_intermediate <= 0) {
    num_intermediate = env.config().num_variables * env.config().values_per_variable;
  }
  return ClipNetwork::three_layer(env.num_setups(), num_intermediate, env.num_experiments(),
                                  env.config().values_per_variable);
}

TrainResult run_training(const Environment& env, Architecture arch, const AgentConfig& agent,
                         const TrainConfig& cfg, std::uint64_t seed) {
  agent.validate(env.config().values_per_variable);
  cfg.validate(env);
  return run_training_on(env, make_network(env, arch), agent, cfg, seed);
}

TrainResult run_generalisation(const Environment& env, Architecture arch,
                               const AgentConfig& agent, const TrainConfig& cfg,
                               std::uint64_t seed) {
  if (!cfg.holdout) throw std::invalid_argument("run_generalisation: holdout pair required");
  return run_training(env, arch, agent, cfg, seed);
}

double holdout_success_probability(const Environment& env, const ClipNetwork& net,
                                   const HoldoutPair& holdout) {
  return detail::holdout_success_on(env, net, holdout);
}

MetricStats aggregate_metric(std::vector<double> per_agent) {
  MetricStats stats;
  stats.per_agent = std::move(per_agent);
  const std::size_t n = stats.per_agent.size();
  if (n == 0) return stats;
  double sum = 0.0;
  for (double v : stats.per_agent) sum += v;
  stats.mean = sum / static_cast<double>(n);
  if (n == 1) {
    stats.single_sample = true;  // std reported as 0 by convention
    return stats;
  }
  double ss = 0.0;
  for (double v : stats.per_agent) ss += (v - stats.mean) * (v - stats.mean);
  stats.stddev = std::sqrt(ss / static_cast<double>(n - 1));
  return stats;
}

EnsembleResult run_ensemble(const Environment& env, Architecture arch, const AgentConfig& agent,
                            const TrainConfig& cfg, int num_threads,
                            const AnalysisThresholds& thresholds) {
  agent.validate(env.config().values_per_variable);
  cfg.validate(env);

  const int n = cfg.ensemble_size;
  std::vector<TrainResult> runs(n);
  std::vector<std::string> failures(n);

  std::atomic<int> next{0};
  auto worker = [&]() {
    while (true) {
      const int k = next.fetch_add(1);
      if (k >= n) return;
      try {
        runs[k] = run_training(env, arch, agent, cfg, cfg.base_seed + k);
      } catch (const std::exception& e) {
        failures[k] = e.what();
      }
    }
  };

  const int workers = std::clamp(num_threads, 1, n);
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
                               std::to_string(cfg.base_seed + k) + " failed: " + failures[k]);
    }
  }
  return aggregate_runs(env, arch, cfg, thresholds, std::move(runs));
}

EnsembleResult aggregate_runs(const Environment& env, Architecture arch, const TrainConfig& cfg,
                              const AnalysisThresholds& thresholds,
                              std::vector<TrainResult> runs) {
  EnsembleResult result;
  result.runs = std::move(runs);

  std::vector<double> final_rate;
  for (const TrainResult& run : result.runs) {
    final_rate.push_back(run.curve.reward_rate.empty() ? 0.0 : run.curve.reward_rate.back());
  }
  result.metrics["final_reward_rate"] = aggregate_metric(std::move(final_rate));

  if (cfg.holdout) {
    std::vector<double> holdout_final;
    for (const TrainResult& run : result.runs) {
      holdout_final.push_back(
          run.curve.holdout_success.empty() ? 0.0 : run.curve.holdout_success.back());
    }
    result.metrics["final_holdout_success"] = aggregate_metric(std::move(holdout_final));
  }

  const bool analyzable = !result.runs.empty() && arch == Architecture::three_layer &&
                          cfg.total_rounds > 0 &&
                          result.runs.front().net.num_intermediate() <= thresholds.subset_cap;
  if (analyzable) {
    const ActionLayout layout{env.num_experiments(), env.config().values_per_variable};
    std::vector<double> subset_count, num_vars, exp_per_var, layer1, layer2, distinct;
    for (const TrainResult& run : result.runs) {
      const Matrix p1 = row_normalized(run.net.h1());
      const Matrix p2 = row_normalized(run.net.h2());
      EnvironmentEstimate est = estimate_environment(p1, p2, layout, thresholds);
      subset_count.push_back(static_cast<double>(est.good_subset_sets.size()));
      num_vars.push_back(est.est_num_variables);
      exp_per_var.push_back(est.est_experiments_per_variable);
      layer1.push_back(est.est_values_per_variable_layer1);
      layer2.push_back(est.est_values_per_variable_layer2);
      distinct.push_back(est.est_distinct_representative_clips);
      result.estimates.push_back(std::move(est));
    }
    result.metrics["good_subset_count"] = aggregate_metric(std::move(subset_count));
    result.metrics["est_num_variables"] = aggregate_metric(std::move(num_vars));
    result.metrics["est_experiments_per_variable"] = aggregate_metric(std::move(exp_per_var));
    result.metrics["est_values_per_variable_layer1"] = aggregate_metric(std::move(layer1));
    result.metrics["est_values_per_variable_layer2"] = aggregate_metric(std::move(layer2));
    result.metrics["est_distinct_representative_clips"] = aggregate_metric(std::move(distinct));
  }
  return result;
}

}  // namespace psim
