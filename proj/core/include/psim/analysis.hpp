#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "psim/matrix.hpp"

namespace psim {

/// How the action layer factorizes into experiments and outcomes.
struct ActionLayout {
  int num_experiments = 0;
  int values_per_variable = 0;
  int num_actions() const { return num_experiments * values_per_variable; }
};

/// Exhaustivity/exclusivity of one candidate subset of intermediate clips.
struct SubsetScore {
  std::vector<int> clips;  // sorted ascending
  double exhaustivity = 0.0;
  double exclusivity = 0.0;
};

/// Per-clip, per-experiment prediction certainty (normalized neg-entropy),
/// entries in [0, 1].
struct PredictabilityTable {
  Matrix values;  // num_intermediate x num_experiments
};

enum class CorrelationMethod { pearson, cosine };

/// Experiment-by-experiment similarity of predictability profiles.
struct CorrelationMatrix {
  Matrix values;  // num_experiments x num_experiments, symmetric, unit diagonal
};

struct RepresentativeSet {
  std::vector<int> clips;  // sorted ascending
  // Set when nothing in the block predicts anything (all predictabilities
  // near zero), so the clip choice is arbitrary.
  bool low_confidence = false;
};

/// Selection thresholds. Ideal agents sit at exhaustivity 0 and large
/// exclusivity; uniform agents fail the exclusivity cut at 0. Trained
/// agents' true variable subsets score a little below zero on exhaustivity
/// (attachment strengths oscillate around the boredom equilibrium), so the
/// cut sits at -0.4, which still rejects partial subsets by a wide margin
/// (those score below -0.7).
struct AnalysisThresholds {
  double exh_min = -0.4;
  double excl_min = std::log(10.0);
  double block_tau = 0.5;
  CorrelationMethod method = CorrelationMethod::pearson;
  int subset_cap = 20;
};

/// Environment parameters read off a trained network.
struct EnvironmentEstimate {
  double est_num_variables = 0.0;
  double est_experiments_per_variable = 0.0;
  double est_values_per_variable_layer1 = 0.0;
  double est_values_per_variable_layer2 = 0.0;
  double est_distinct_representative_clips = 0.0;
  std::vector<std::vector<int>> variable_blocks;
  std::vector<RepresentativeSet> representative_clip_sets;
  std::vector<SubsetScore> good_subset_sets;
};

/// Weights emphasizing the percepts whose `values` entry is smallest:
/// percepts are ranked by value descending (ties by ascending index, the
/// largest value getting rank 0), and weight (rank/(S-1))^3, normalized to
/// unit sum. Requires S >= 2.
std::vector<double> violation_weights(std::span<const double> values);

/// Weighted log-ratio of in-subset vs out-of-subset peak transition
/// probability; 0 for a subset that captures every percept, negative when
/// some percept escapes the subset. `p1` must be row-stochastic
/// [num_percepts x num_intermediate]; the subset must be a non-empty proper
/// subset of the clips.
double exhaustivity(const Matrix& p1, std::span<const int> subset);

/// Weighted log-ratio of largest vs second-largest in-subset transition
/// probability; non-negative, 0 when percepts spread evenly over the
/// subset. Requires |subset| >= 2.
double exclusivity(const Matrix& p1, std::span<const int> subset);

/// Scores for every subset with 2 <= |subset| <= num_clips - 1, ordered by
/// cardinality then lexicographically. Refuses num_clips > cap; raise the
/// cap explicitly if the 2^n enumeration is really intended.
std::vector<SubsetScore> subset_scan(const Matrix& p1, int cap = 20, int num_threads = 1);

/// Subsets clearing both thresholds, pruned to a pairwise-disjoint family
/// greedily in order of descending exclusivity.
std::vector<SubsetScore> good_subsets(std::span<const SubsetScore> scores, double exh_min,
                                      double excl_min);

/// Entry (i, e): 1 - H(q)/ln(O) with q = row i of `p2` restricted to
/// experiment e's outcomes and renormalized; 0 when the restricted mass is
/// below 1e-12. `p2` must be row-stochastic [num_intermediate x num_actions].
PredictabilityTable predictability_table(const Matrix& p2, const ActionLayout& layout);

/// Column-by-column similarity of the predictability profiles. Constant
/// columns correlate to 0 under pearson; the diagonal is exactly 1.
CorrelationMatrix correlation_matrix(const PredictabilityTable& table,
                                     CorrelationMethod method = CorrelationMethod::pearson);

/// Connected components of the graph with edges where correlation > tau,
/// each sorted ascending, components ordered by smallest member.
std::vector<std::vector<int>> extract_blocks(const CorrelationMatrix& corr, double tau);

/// For each (experiment in block, outcome), the strongest predicting clip
/// among those whose predictability for that experiment exceeds the block
/// median; union over the block.
RepresentativeSet representative_clips(const Matrix& p2, const PredictabilityTable& table,
                                       std::span<const int> block, const ActionLayout& layout);

/// Full second-layer (plus first-layer cardinality) read-out of the
/// environment parameters.
EnvironmentEstimate estimate_environment(const Matrix& p1, const Matrix& p2,
                                         const ActionLayout& layout,
                                         const AnalysisThresholds& thresholds);

/// Permutation of intermediate clips grouping them by identified variable
/// and ordering each group by predicted outcome, for display of h-matrices.
std::vector<int> display_clip_order(const EnvironmentEstimate& estimate, const Matrix& p2,
                                    const ActionLayout& layout);

}  // namespace psim
