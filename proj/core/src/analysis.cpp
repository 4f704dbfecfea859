#include "psim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

namespace psim {

namespace {

void check_subset(const Matrix& p1, std::span<const int> subset, std::size_t min_size) {
  if (subset.size() < min_size) {
    throw std::invalid_argument("subset must have at least " + std::to_string(min_size) +
                                " clips");
  }
  if (subset.size() >= static_cast<std::size_t>(p1.cols())) {
    throw std::invalid_argument("subset must be a proper subset of the intermediate clips");
  }
  for (int i : subset) {
    if (i < 0 || i >= p1.cols()) throw std::invalid_argument("subset clip index out of range");
  }
}

struct SubsetMeasures {
  double exhaustivity;
  double exclusivity;  // NaN when |subset| < 2
};

/// Shared computation: both measures use the weights derived from the
/// per-percept in-subset peak probability.
SubsetMeasures measure_subset(const Matrix& p1, std::span<const int> subset) {
  const int num_percepts = p1.rows();
  const int num_clips = p1.cols();

  std::vector<char> in_subset(num_clips, 0);
  for (int i : subset) in_subset[i] = 1;

  std::vector<double> max_in(num_percepts), sec_in(num_percepts), max_out(num_percepts);
  for (int s = 0; s < num_percepts; ++s) {
    const auto row = p1.row(s);
    double mi = -1.0, si = -1.0, mo = 0.0;
    for (int i = 0; i < num_clips; ++i) {
      const double p = row[i];
      if (in_subset[i]) {
        if (p > mi) {
          si = mi;
          mi = p;
        } else if (p > si) {
          si = p;
        }
      } else if (p > mo) {
        mo = p;
      }
    }
    max_in[s] = mi;
    sec_in[s] = si;
    max_out[s] = mo;
  }

  const std::vector<double> weights = violation_weights(max_in);

  double exh = 0.0;
  double excl = 0.0;
  const bool want_excl = subset.size() >= 2;
  for (int s = 0; s < num_percepts; ++s) {
    if (weights[s] == 0.0) continue;
    exh += weights[s] * std::log(max_in[s] / max_out[s]);
    if (want_excl) excl += weights[s] * std::log(max_in[s] / sec_in[s]);
  }
  return {exh, want_excl ? excl : std::numeric_limits<double>::quiet_NaN()};
}

}  // namespace

std::vector<double> violation_weights(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) throw std::invalid_argument("violation_weights: need at least 2 values");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Largest value first; ties broken by ascending index.
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return values[a] > values[b]; });

  std::vector<double> weights(n);
  double total = 0.0;
  for (std::size_t rank = 0; rank < n; ++rank) {
    const double w = std::pow(static_cast<double>(rank) / static_cast<double>(n - 1), 3);
    weights[order[rank]] = w;
    total += w;
  }
  for (double& w : weights) w /= total;
  return weights;
}

double exhaustivity(const Matrix& p1, std::span<const int> subset) {
  check_subset(p1, subset, 1);
  return measure_subset(p1, subset).exhaustivity;
}

double exclusivity(const Matrix& p1, std::span<const int> subset) {
  check_subset(p1, subset, 2);
  return measure_subset(p1, subset).exclusivity;
}

std::vector<SubsetScore> subset_scan(const Matrix& p1, int cap, int num_threads) {
  const int num_clips = p1.cols();
  if (num_clips > cap) {
    throw std::invalid_argument(
        "subset_scan: " + std::to_string(num_clips) + " intermediate clips exceed the cap of " +
        std::to_string(cap) + "; pass a larger cap explicitly if enumerating 2^" +
        std::to_string(num_clips) + " subsets is intended");
  }

  std::vector<SubsetScore> scores;
  // By cardinality, then lexicographically within each cardinality.
  for (int k = 2; k <= num_clips - 1; ++k) {
    std::vector<int> subset(k);
    std::iota(subset.begin(), subset.end(), 0);
    while (true) {
      scores.push_back({subset, 0.0, 0.0});
      int pos = k - 1;
      while (pos >= 0 && subset[pos] == num_clips - k + pos) --pos;
      if (pos < 0) break;
      ++subset[pos];
      for (int j = pos + 1; j < k; ++j) subset[j] = subset[j - 1] + 1;
    }
  }

  auto score_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t idx = begin; idx < end; ++idx) {
      const SubsetMeasures m = measure_subset(p1, scores[idx].clips);
      scores[idx].exhaustivity = m.exhaustivity;
      scores[idx].exclusivity = m.exclusivity;
    }
  };

  if (num_threads <= 1 || scores.size() < 256) {
    score_range(0, scores.size());
  } else {
    const std::size_t workers = std::min<std::size_t>(num_threads, scores.size());
    std::vector<std::thread> pool;
    const std::size_t chunk = (scores.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(begin + chunk, scores.size());
      if (begin < end) pool.emplace_back(score_range, begin, end);
    }
    for (auto& t : pool) t.join();
  }
  return scores;
}

std::vector<SubsetScore> good_subsets(std::span<const SubsetScore> scores, double exh_min,
                                      double excl_min) {
  std::vector<const SubsetScore*> candidates;
  for (const SubsetScore& s : scores) {
    if (s.exhaustivity >= exh_min && s.exclusivity >= excl_min) candidates.push_back(&s);
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const SubsetScore* a, const SubsetScore* b) {
                     if (a->exclusivity != b->exclusivity) return a->exclusivity > b->exclusivity;
                     return a->exhaustivity > b->exhaustivity;
                   });

  std::vector<SubsetScore> selected;
  std::vector<char> taken;
  for (const SubsetScore* c : candidates) {
    bool overlaps = false;
    for (int i : c->clips) {
      if (static_cast<std::size_t>(i) < taken.size() && taken[i]) {
        overlaps = true;
        break;
      }
    }
    if (overlaps) continue;
    for (int i : c->clips) {
      if (static_cast<std::size_t>(i) >= taken.size()) taken.resize(i + 1, 0);
      taken[i] = 1;
    }
    selected.push_back(*c);
  }
  return selected;
}

PredictabilityTable predictability_table(const Matrix& p2, const ActionLayout& layout) {
  if (p2.cols() != layout.num_actions()) {
    throw std::invalid_argument("predictability_table: layout does not match matrix width");
  }
  const int values = layout.values_per_variable;
  const double log_values = std::log(static_cast<double>(values));
  PredictabilityTable table;
  table.values = Matrix(p2.rows(), layout.num_experiments, 0.0);
  for (int i = 0; i < p2.rows(); ++i) {
    const auto row = p2.row(i);
    for (int e = 0; e < layout.num_experiments; ++e) {
      double mass = 0.0;
      for (int o = 0; o < values; ++o) mass += row[e * values + o];
      if (mass < 1e-12) continue;  // clip irrelevant to this experiment
      if (values == 1) {
        table.values(i, e) = 1.0;  // single-outcome experiments are fully determined
        continue;
      }
      double entropy = 0.0;
      for (int o = 0; o < values; ++o) {
        const double q = row[e * values + o] / mass;
        if (q > 0.0) entropy -= q * std::log(q);
      }
      table.values(i, e) = std::clamp(1.0 - entropy / log_values, 0.0, 1.0);
    }
  }
  return table;
}

CorrelationMatrix correlation_matrix(const PredictabilityTable& table, CorrelationMethod method) {
  const Matrix& t = table.values;
  const int num_experiments = t.cols();
  const int num_clips = t.rows();
  CorrelationMatrix corr;
  corr.values = Matrix(num_experiments, num_experiments, 0.0);

  std::vector<double> mean(num_experiments, 0.0);
  for (int e = 0; e < num_experiments; ++e) {
    for (int i = 0; i < num_clips; ++i) mean[e] += t(i, e);
    mean[e] /= num_clips;
  }

  for (int a = 0; a < num_experiments; ++a) {
    corr.values(a, a) = 1.0;
    for (int b = a + 1; b < num_experiments; ++b) {
      double cross = 0.0, var_a = 0.0, var_b = 0.0;
      for (int i = 0; i < num_clips; ++i) {
        double x = t(i, a);
        double y = t(i, b);
        if (method == CorrelationMethod::pearson) {
          x -= mean[a];
          y -= mean[b];
        }
        cross += x * y;
        var_a += x * x;
        var_b += y * y;
      }
      const double denom = std::sqrt(var_a) * std::sqrt(var_b);
      const double r = denom > 0.0 ? cross / denom : 0.0;
      corr.values(a, b) = r;
      corr.values(b, a) = r;
    }
  }
  return corr;
}

std::vector<std::vector<int>> extract_blocks(const CorrelationMatrix& corr, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw std::invalid_argument("extract_blocks: tau must be in (0, 1)");
  }
  const int num_experiments = corr.values.rows();
  std::vector<int> component(num_experiments, -1);
  std::vector<std::vector<int>> blocks;
  for (int start = 0; start < num_experiments; ++start) {
    if (component[start] >= 0) continue;
    std::vector<int> stack{start};
    std::vector<int> block;
    component[start] = static_cast<int>(blocks.size());
    while (!stack.empty()) {
      const int e = stack.back();
      stack.pop_back();
      block.push_back(e);
      for (int f = 0; f < num_experiments; ++f) {
        if (component[f] < 0 && corr.values(e, f) > tau) {
          component[f] = component[e];
          stack.push_back(f);
        }
      }
    }
    std::sort(block.begin(), block.end());
    blocks.push_back(std::move(block));
  }
  return blocks;
}

RepresentativeSet representative_clips(const Matrix& p2, const PredictabilityTable& table,
                                       std::span<const int> block, const ActionLayout& layout) {
  if (block.empty()) throw std::invalid_argument("representative_clips: empty block");
  const int num_clips = p2.rows();
  const int values = layout.values_per_variable;

  std::vector<double> block_values;
  block_values.reserve(static_cast<std::size_t>(num_clips) * block.size());
  double peak = 0.0;
  for (int e : block) {
    for (int i = 0; i < num_clips; ++i) {
      block_values.push_back(table.values(i, e));
      peak = std::max(peak, table.values(i, e));
    }
  }
  std::sort(block_values.begin(), block_values.end());
  const std::size_t n = block_values.size();
  const double median = n % 2 == 1 ? block_values[n / 2]
                                   : 0.5 * (block_values[n / 2 - 1] + block_values[n / 2]);

  RepresentativeSet result;
  result.low_confidence = peak < 0.05;
  std::vector<char> chosen(num_clips, 0);
  for (int e : block) {
    std::vector<int> candidates;
    for (int i = 0; i < num_clips; ++i) {
      if (table.values(i, e) > median) candidates.push_back(i);
    }
    if (candidates.empty()) {  // flat predictability; fall back to all clips
      candidates.resize(num_clips);
      std::iota(candidates.begin(), candidates.end(), 0);
    }
    for (int o = 0; o < values; ++o) {
      int best = candidates.front();
      for (int i : candidates) {
        if (p2(i, e * values + o) > p2(best, e * values + o)) best = i;
      }
      chosen[best] = 1;
    }
  }
  for (int i = 0; i < num_clips; ++i) {
    if (chosen[i]) result.clips.push_back(i);
  }
  return result;
}

EnvironmentEstimate estimate_environment(const Matrix& p1, const Matrix& p2,
                                         const ActionLayout& layout,
                                         const AnalysisThresholds& thresholds) {
  EnvironmentEstimate est;

  const PredictabilityTable table = predictability_table(p2, layout);
  const CorrelationMatrix corr = correlation_matrix(table, thresholds.method);
  est.variable_blocks = extract_blocks(corr, thresholds.block_tau);
  est.est_num_variables = static_cast<double>(est.variable_blocks.size());
  est.est_experiments_per_variable =
      static_cast<double>(layout.num_experiments) / est.est_num_variables;

  const std::vector<SubsetScore> scores = subset_scan(p1, thresholds.subset_cap);
  est.good_subset_sets = good_subsets(scores, thresholds.exh_min, thresholds.excl_min);
  double layer1 = 0.0;
  for (const SubsetScore& s : est.good_subset_sets) {
    layer1 += static_cast<double>(s.clips.size());
  }
  est.est_values_per_variable_layer1 =
      est.good_subset_sets.empty() ? 0.0 : layer1 / est.good_subset_sets.size();

  std::vector<char> distinct(p2.rows(), 0);
  double layer2 = 0.0;
  for (const auto& block : est.variable_blocks) {
    RepresentativeSet reps = representative_clips(p2, table, block, layout);
    layer2 += static_cast<double>(reps.clips.size());
    for (int i : reps.clips) distinct[i] = 1;
    est.representative_clip_sets.push_back(std::move(reps));
  }
  est.est_values_per_variable_layer2 =
      est.variable_blocks.empty() ? 0.0 : layer2 / est.variable_blocks.size();
  est.est_distinct_representative_clips =
      static_cast<double>(std::count(distinct.begin(), distinct.end(), 1));
  return est;
}

std::vector<int> display_clip_order(const EnvironmentEstimate& estimate, const Matrix& p2,
                                    const ActionLayout& layout) {
  const int num_clips = p2.rows();
  const int values = layout.values_per_variable;
  std::vector<int> order;
  std::vector<char> placed(num_clips, 0);

  for (std::size_t b = 0; b < estimate.representative_clip_sets.size(); ++b) {
    const auto& reps = estimate.representative_clip_sets[b].clips;
    const int lead_experiment = estimate.variable_blocks[b].front();
    // Within a block, order clips by the outcome they most strongly predict
    // for the block's first experiment.
    std::vector<std::pair<int, int>> keyed;  // (outcome, clip)
    for (int i : reps) {
      if (placed[i]) continue;
      int best_outcome = 0;
      for (int o = 1; o < values; ++o) {
        if (p2(i, lead_experiment * values + o) >
            p2(i, lead_experiment * values + best_outcome)) {
          best_outcome = o;
        }
      }
      keyed.emplace_back(best_outcome, i);
    }
    std::sort(keyed.begin(), keyed.end());
    for (const auto& [outcome, clip] : keyed) {
      order.push_back(clip);
      placed[clip] = 1;
    }
  }
  for (int i = 0; i < num_clips; ++i) {
    if (!placed[i]) order.push_back(i);
  }
  return order;
}

}  // namespace psim
