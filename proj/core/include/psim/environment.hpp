#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "psim/rng.hpp"

namespace psim {

using SetupId = std::int32_t;

/// Hidden-variable structure of an environment. Setups are value vectors
/// over num_variables variables, each taking values_per_variable values;
/// every variable is probed by experiments_per_variable experiments.
struct EnvConfig {
  int num_variables = 3;
  int values_per_variable = 3;
  int experiments_per_variable = 2;
  std::uint64_t seed = 0;
  // Permute the experiment -> variable assignment instead of using the
  // blocked layout; lets one check that analysis does not depend on the
  // suggestive default ordering.
  bool permute_experiments = false;

  long long num_setups() const;
  int num_experiments() const { return num_variables * experiments_per_variable; }
  int num_predictions() const { return num_experiments() * values_per_variable; }

  /// Throws std::invalid_argument on zero counts or setup-count overflow.
  void validate() const;
};

/// A prediction names one experiment and one outcome for it.
struct PredictionId {
  int experiment = 0;
  int outcome = 0;

  int flat(int values_per_variable) const { return experiment * values_per_variable + outcome; }
  static PredictionId from_flat(int flat, int values_per_variable) {
    return {flat / values_per_variable, flat % values_per_variable};
  }
  friend bool operator==(const PredictionId&, const PredictionId&) = default;
};

/// Prediction environment: serves setups as opaque integer labels and
/// knows, internally, which value vector each label hides. Immutable after
/// construction and safe to share across concurrent trainings.
class Environment {
 public:
  static Environment build(const EnvConfig& config);

  const EnvConfig& config() const { return cfg_; }
  int num_setups() const { return static_cast<int>(values_.size()) / cfg_.num_variables; }
  int num_experiments() const { return cfg_.num_experiments(); }
  int num_predictions() const { return cfg_.num_predictions(); }

  /// Uniform draw over setup labels.
  SetupId sample_setup(Rng& rng) const {
    return static_cast<SetupId>(rng.below(static_cast<std::uint64_t>(num_setups())));
  }

  int variable_of_experiment(int experiment) const;

  /// The outcome that setup s produces under the given experiment.
  int correct_outcome(SetupId s, int experiment) const;

  /// 1 iff the prediction names the correct outcome of its experiment for s.
  int evaluate(SetupId s, const PredictionId& p) const {
    return p.outcome == correct_outcome(s, p.experiment) ? 1 : 0;
  }

  /// Hidden value vector of a setup. Debugging/analysis only; never shown
  /// to agents.
  std::span<const int> value_vector(SetupId s) const;

  /// Deterministic debug table (label -> value vector) as CSV.
  void write_setup_table(std::ostream& os) const;

 private:
  EnvConfig cfg_;
  std::vector<int> values_;  // num_setups x num_variables, row-major
  std::vector<int> experiment_variable_;
};

}  // namespace psim
