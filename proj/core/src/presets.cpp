#include "psim/presets.hpp"

namespace psim {

namespace {

// Training durations follow the per-environment table the agents were
// settled with (larger hidden spaces need longer runs). Forgetting rates
// scale roughly inversely with the number of (setup, variable) pairs so
// that an edge keeps its strength between revisits; the 2-value
// environment needs much stronger forgetting plus a higher boredom
// threshold to starve joint two-variable labelings, which cost no more
// clips than factored ones when values come in pairs.
ExperimentPreset make(std::string name, std::string description, int variables, int values,
                      int experiments_per_variable, long long rounds, Architecture arch) {
  ExperimentPreset p;
  p.name = std::move(name);
  p.description = std::move(description);
  p.env.num_variables = variables;
  p.env.values_per_variable = values;
  p.env.experiments_per_variable = experiments_per_variable;
  p.architecture = arch;
  p.train.total_rounds = rounds;
  p.train.curve_window = arch == Architecture::three_layer ? 10'000 : 1'000;
  return p;
}

std::vector<ExperimentPreset> build_presets() {
  std::vector<ExperimentPreset> presets;

  presets.push_back(make("default3x2x3", "3 variables x 3 values, 2 experiments each, three-layer",
                         3, 3, 2, 5'000'000, Architecture::three_layer));
  presets.push_back(make("twolayer", "default environment, two-layer baseline agent", 3, 3, 2,
                         10'000, Architecture::two_layer));

  presets.push_back(make("v2", "2 hidden variables", 2, 3, 2, 500'000,
                         Architecture::three_layer));
  presets.push_back(make("v4", "4 hidden variables (long run)", 4, 3, 2, 50'000'000,
                         Architecture::three_layer));
  presets.back().agent.gamma = 7.5e-5;
  presets.push_back(make("v5", "5 hidden variables (very long run)", 5, 3, 2, 100'000'000,
                         Architecture::three_layer));
  presets.back().agent.gamma = 2e-5;

  presets.push_back(make("et1", "1 experiment per variable", 3, 3, 1, 500'000,
                         Architecture::three_layer));
  presets.push_back(make("et3", "3 experiments per variable", 3, 3, 3, 5'000'000,
                         Architecture::three_layer));
  presets.push_back(make("et4", "4 experiments per variable", 3, 3, 4, 5'000'000,
                         Architecture::three_layer));

  presets.push_back(make("o2", "2 values per variable", 3, 2, 2, 500'000,
                         Architecture::three_layer));
  presets.back().agent.gamma = 2e-3;
  presets.back().agent.boredom_threshold = 0.95;
  presets.push_back(make("o4", "4 values per variable", 3, 4, 2, 10'000'000,
                         Architecture::three_layer));
  presets.back().agent.gamma = 1.3e-4;

  return presets;
}

}  // namespace

const std::vector<ExperimentPreset>& experiment_presets() {
  static const std::vector<ExperimentPreset> presets = build_presets();
  return presets;
}

const ExperimentPreset* find_preset(const std::string& name) {
  for (const ExperimentPreset& p : experiment_presets()) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

}  // namespace psim
