#pragma once

#include <optional>
#include <span>
#include <vector>

#include "psim/environment.hpp"
#include "psim/matrix.hpp"
#include "psim/rng.hpp"

namespace psim {

enum class Architecture { two_layer, three_layer };

/// Learning parameters of an agent.
///
/// The forgetting rate and boredom threshold below are calibrated against
/// the default 27-setup environment: gamma is small enough that an edge
/// revisited every ~160 rounds holds its strength, and the threshold keeps
/// every percept's label attachments pinned near an even split (services
/// stop only once the restricted prediction confidence clears it).
struct AgentConfig {
  double gamma = 3e-4;              // forgetting rate, [0, 1)
  double reward_magnitude = 1.0;    // R added to used edges on success
  double boredom_threshold = 0.92;  // in (1/values_per_variable, 1]
  int max_redraws = 50;             // cap on boredom-driven resampling

  /// Throws std::invalid_argument if any parameter is out of range.
  void validate(int values_per_variable) const;
};

/// Layered clip network. Percept clips connect to action clips either
/// directly (two-layer) or through one layer of intermediate clips
/// (three-layer); every percept-to-action path crosses exactly one
/// intermediate clip. Edge weights start at h = 1.
class ClipNetwork {
 public:
  ClipNetwork() = default;  // empty placeholder; assign a built network

  static ClipNetwork two_layer(int num_percepts, int num_experiments, int values_per_variable);
  static ClipNetwork three_layer(int num_percepts, int num_intermediate, int num_experiments,
                                 int values_per_variable);

  Architecture architecture() const { return arch_; }
  int num_percepts() const { return h1_.rows(); }
  int num_intermediate() const { return arch_ == Architecture::three_layer ? h1_.cols() : 0; }
  int num_actions() const { return num_experiments_ * values_per_variable_; }
  int num_experiments() const { return num_experiments_; }
  int values_per_variable() const { return values_per_variable_; }

  /// Percept-layer weights: [num_percepts x num_intermediate] for
  /// three-layer, [num_percepts x num_actions] for two-layer.
  Matrix& h1() { return h1_; }
  const Matrix& h1() const { return h1_; }

  /// Intermediate-to-action weights; empty for two-layer.
  Matrix& h2() { return h2_; }
  const Matrix& h2() const { return h2_; }

  friend bool operator==(const ClipNetwork&, const ClipNetwork&) = default;

 private:
  Architecture arch_ = Architecture::two_layer;
  int num_experiments_ = 0;
  int values_per_variable_ = 0;
  Matrix h1_;
  Matrix h2_;
};

/// One deliberation outcome: the clip sequence from percept to action.
struct DeliberationPath {
  SetupId percept = 0;
  int intermediate = -1;  // -1 for two-layer paths
  PredictionId action;
};

/// Normalized hopping probabilities of one h-row (P(j|i) = h_ij / sum_k h_ik).
/// Throws std::invalid_argument on non-positive entries.
std::vector<double> hop_probabilities(std::span<const double> h_row);

/// Exact probability of each action for percept s (marginal of the walk).
std::vector<double> action_marginal(const ClipNetwork& net, SetupId s);

/// True iff the agent already favours one outcome of `experiment` for s with
/// renormalized probability above the boredom threshold (strict).
bool is_boring(const ClipNetwork& net, const AgentConfig& cfg, SetupId s, int experiment);

/// Reusable buffers for deliberate(); avoids per-round allocation in
/// training loops.
struct DeliberationScratch {
  std::vector<double> percept_probs;
  std::vector<double> marginal;
  std::vector<double> row_sums;
  std::vector<char> boring;
};

/// Random walk from percept s to an action. Paths whose action pertains to
/// a boring experiment are discarded and redrawn from the percept, up to
/// cfg.max_redraws times; if every experiment is boring or the cap is hit,
/// the last sampled path is returned as is.
DeliberationPath deliberate(const ClipNetwork& net, const AgentConfig& cfg, SetupId s, Rng& rng);
DeliberationPath deliberate(const ClipNetwork& net, const AgentConfig& cfg, SetupId s, Rng& rng,
                            DeliberationScratch& scratch);

/// One round of learning: every edge decays as h <- 1 + (1-gamma)(h-1), and
/// the edges on `path` additionally gain reward_magnitude * reward.
void update(ClipNetwork& net, const AgentConfig& cfg, const DeliberationPath& path, int reward);

}  // namespace psim
