#include "psim/environment.hpp"

#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace psim {

long long EnvConfig::num_setups() const {
  long long n = 1;
  for (int k = 0; k < num_variables; ++k) {
    if (n > std::numeric_limits<int>::max() / values_per_variable) {
      throw std::invalid_argument("EnvConfig: setup count overflows");
    }
    n *= values_per_variable;
  }
  return n;
}

void EnvConfig::validate() const {
  if (num_variables < 1) throw std::invalid_argument("EnvConfig: num_variables must be >= 1");
  if (values_per_variable < 1) {
    throw std::invalid_argument("EnvConfig: values_per_variable must be >= 1");
  }
  if (experiments_per_variable < 1) {
    throw std::invalid_argument("EnvConfig: experiments_per_variable must be >= 1");
  }
  num_setups();  // overflow check
}

Environment Environment::build(const EnvConfig& config) {
  config.validate();
  Environment env;
  env.cfg_ = config;

  const int num_setups = static_cast<int>(config.num_setups());
  const int v = config.num_variables;
  const int o = config.values_per_variable;

  // Labels are a seeded permutation of the canonical mixed-radix
  // enumeration, so a label says nothing about the value vector it hides.
  std::vector<int> label_of(num_setups);
  std::iota(label_of.begin(), label_of.end(), 0);
  Rng label_rng(derive_seed(config.seed, 0x5e7));
  label_rng.shuffle(label_of);

  env.values_.assign(static_cast<std::size_t>(num_setups) * v, 0);
  for (int canonical = 0; canonical < num_setups; ++canonical) {
    int rest = canonical;
    const int label = label_of[canonical];
    for (int k = v - 1; k >= 0; --k) {
      env.values_[static_cast<std::size_t>(label) * v + k] = rest % o;
      rest /= o;
    }
  }

  env.experiment_variable_.resize(config.num_experiments());
  for (int e = 0; e < config.num_experiments(); ++e) {
    env.experiment_variable_[e] = e / config.experiments_per_variable;
  }
  if (config.permute_experiments) {
    Rng exp_rng(derive_seed(config.seed, 0xe8b));
    exp_rng.shuffle(env.experiment_variable_);
  }
  return env;
}

int Environment::variable_of_experiment(int experiment) const {
  if (experiment < 0 || experiment >= num_experiments()) {
    throw std::out_of_range("Environment: experiment " + std::to_string(experiment) +
                            " out of range");
  }
  return experiment_variable_[experiment];
}

int Environment::correct_outcome(SetupId s, int experiment) const {
  if (s < 0 || s >= num_setups()) {
    throw std::out_of_range("Environment: setup " + std::to_string(s) + " out of range");
  }
  // Outcome indices coincide with hidden values (identity coarse-graining).
  return values_[static_cast<std::size_t>(s) * cfg_.num_variables +
                 variable_of_experiment(experiment)];
}

std::span<const int> Environment::value_vector(SetupId s) const {
  if (s < 0 || s >= num_setups()) {
    throw std::out_of_range("Environment: setup " + std::to_string(s) + " out of range");
  }
  return {values_.data() + static_cast<std::size_t>(s) * cfg_.num_variables,
          static_cast<std::size_t>(cfg_.num_variables)};
}

void Environment::write_setup_table(std::ostream& os) const {
  os << "setup";
  for (int k = 0; k < cfg_.num_variables; ++k) os << ",value" << k;
  os << '\n';
  for (int s = 0; s < num_setups(); ++s) {
    os << s;
    for (int value : value_vector(s)) os << ',' << value;
    os << '\n';
  }
}

}  // namespace psim
