#pragma once

#include <string>
#include <vector>

#include "psim/ecm.hpp"
#include "psim/environment.hpp"
#include "psim/training.hpp"

namespace psim {

/// A ready-to-run experiment: environment shape, architecture, agent
/// parameters and a training duration long enough for the h-matrices to
/// settle in that environment.
struct ExperimentPreset {
  std::string name;
  std::string description;
  EnvConfig env;
  Architecture architecture = Architecture::three_layer;
  int num_intermediate = 0;  // 0: num_variables * values_per_variable
  AgentConfig agent;
  TrainConfig train;
};

const std::vector<ExperimentPreset>& experiment_presets();

/// nullptr if no preset has that name.
const ExperimentPreset* find_preset(const std::string& name);

}  // namespace psim
