#include "common.hpp"

#include <cmath>
#include <fstream>

namespace psim::cli {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

template <class T>
void read_key(const json& section, const char* section_name, const char* key, T& out) {
  if (!section.contains(key)) return;
  try {
    out = section.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key ") + section_name + "." + key + ": " + e.what());
  }
}

}  // namespace

void apply_preset(RunSpec& spec, const std::string& name) {
  const ExperimentPreset* preset = find_preset(name);
  if (!preset) {
    std::string names;
    for (const auto& p : experiment_presets()) names += " " + p.name;
    throw ConfigError("unknown preset '" + name + "'; available:" + names);
  }
  spec.env = preset->env;
  spec.architecture = preset->architecture;
  spec.num_intermediate = preset->num_intermediate;
  spec.agent = preset->agent;
  spec.train = preset->train;
}

void apply_config_file(RunSpec& spec, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file: " + path);
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config root must be an object: " + path);

  if (doc.contains("environment")) {
    const json& env = doc["environment"];
    read_key(env, "environment", "num_variables", spec.env.num_variables);
    read_key(env, "environment", "values_per_variable", spec.env.values_per_variable);
    read_key(env, "environment", "experiments_per_variable", spec.env.experiments_per_variable);
    read_key(env, "environment", "seed", spec.env.seed);
    read_key(env, "environment", "permute_experiments", spec.env.permute_experiments);
  }
  if (doc.contains("architecture")) {
    const std::string arch = doc["architecture"].get<std::string>();
    if (arch == "two_layer") {
      spec.architecture = Architecture::two_layer;
    } else if (arch == "three_layer") {
      spec.architecture = Architecture::three_layer;
    } else {
      throw ConfigError("config key architecture: expected 'two_layer' or 'three_layer', got '" +
                        arch + "'");
    }
  }
  if (doc.contains("num_intermediate")) {
    read_key(doc, "", "num_intermediate", spec.num_intermediate);
  }
  if (doc.contains("agent")) {
    const json& agent = doc["agent"];
    read_key(agent, "agent", "gamma", spec.agent.gamma);
    read_key(agent, "agent", "reward_magnitude", spec.agent.reward_magnitude);
    read_key(agent, "agent", "boredom_threshold", spec.agent.boredom_threshold);
    read_key(agent, "agent", "max_redraws", spec.agent.max_redraws);
  }
  if (doc.contains("training")) {
    const json& train = doc["training"];
    read_key(train, "training", "total_rounds", spec.train.total_rounds);
    read_key(train, "training", "curve_window", spec.train.curve_window);
    read_key(train, "training", "eval_interval", spec.train.eval_interval);
    read_key(train, "training", "ensemble_size", spec.train.ensemble_size);
    read_key(train, "training", "base_seed", spec.train.base_seed);
    if (train.contains("holdout")) {
      HoldoutPair pair;
      read_key(train["holdout"], "training.holdout", "setup", pair.setup);
      read_key(train["holdout"], "training.holdout", "experiment", pair.experiment);
      spec.train.holdout = pair;
    }
  }
  if (doc.contains("analysis")) {
    const json& analysis = doc["analysis"];
    read_key(analysis, "analysis", "exh_min", spec.analysis.exh_min);
    read_key(analysis, "analysis", "excl_min", spec.analysis.excl_min);
    read_key(analysis, "analysis", "block_tau", spec.analysis.block_tau);
    read_key(analysis, "analysis", "subset_cap", spec.analysis.subset_cap);
    if (analysis.contains("correlation")) {
      const std::string method = analysis["correlation"].get<std::string>();
      if (method == "pearson") {
        spec.analysis.method = CorrelationMethod::pearson;
      } else if (method == "cosine") {
        spec.analysis.method = CorrelationMethod::cosine;
      } else {
        throw ConfigError("config key analysis.correlation: expected 'pearson' or 'cosine'");
      }
    }
  }
}

std::string architecture_name(Architecture arch) {
  return arch == Architecture::two_layer ? "two_layer" : "three_layer";
}

ordered_json spec_to_json(const RunSpec& spec) {
  ordered_json j;
  j["environment"] = {{"num_variables", spec.env.num_variables},
                      {"values_per_variable", spec.env.values_per_variable},
                      {"experiments_per_variable", spec.env.experiments_per_variable},
                      {"seed", spec.env.seed},
                      {"permute_experiments", spec.env.permute_experiments}};
  j["architecture"] = architecture_name(spec.architecture);
  j["num_intermediate"] =
      spec.num_intermediate > 0
          ? spec.num_intermediate
          : spec.env.num_variables * spec.env.values_per_variable;
  j["agent"] = {{"gamma", spec.agent.gamma},
                {"reward_magnitude", spec.agent.reward_magnitude},
                {"boredom_threshold", spec.agent.boredom_threshold},
                {"max_redraws", spec.agent.max_redraws}};
  ordered_json train{{"total_rounds", spec.train.total_rounds},
                     {"curve_window", spec.train.curve_window},
                     {"eval_interval", spec.train.effective_eval_interval()},
                     {"ensemble_size", spec.train.ensemble_size},
                     {"base_seed", spec.train.base_seed}};
  if (spec.train.holdout) {
    train["holdout"] = {{"setup", spec.train.holdout->setup},
                        {"experiment", spec.train.holdout->experiment}};
  }
  j["training"] = train;
  j["analysis"] = {
      {"exh_min", spec.analysis.exh_min},
      {"excl_min", spec.analysis.excl_min},
      {"block_tau", spec.analysis.block_tau},
      {"correlation", spec.analysis.method == CorrelationMethod::pearson ? "pearson" : "cosine"},
      {"subset_cap", spec.analysis.subset_cap}};
  j["threads"] = spec.threads;
  return j;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  return os;
}

void write_manifest(const RunSpec& spec, const std::string& command,
                    const std::filesystem::path& out_dir,
                    const std::vector<std::string>& outputs, const ordered_json& extra) {
  ordered_json manifest;
  manifest["tool"] = kToolVersion;
  manifest["command"] = command;
  if (!extra.is_null() && !extra.empty()) manifest.update(extra);
  manifest.update(spec_to_json(spec));
  manifest["outputs"] = outputs;
  auto os = open_out(out_dir / "manifest.json");
  os << manifest.dump(2) << '\n';
}

ordered_json metric_to_json(const MetricStats& stats) {
  ordered_json j;
  j["mean"] = stats.mean;
  j["std"] = stats.stddev;
  if (stats.single_sample) j["single_sample"] = true;
  j["per_agent"] = stats.per_agent;
  return j;
}

ordered_json estimate_to_json(const EnvironmentEstimate& est) {
  ordered_json j;
  j["est_num_variables"] = est.est_num_variables;
  j["est_experiments_per_variable"] = est.est_experiments_per_variable;
  j["est_values_per_variable_layer1"] = est.est_values_per_variable_layer1;
  j["est_values_per_variable_layer2"] = est.est_values_per_variable_layer2;
  j["est_distinct_representative_clips"] = est.est_distinct_representative_clips;
  j["variable_blocks"] = est.variable_blocks;
  ordered_json reps = ordered_json::array();
  for (const auto& set : est.representative_clip_sets) {
    reps.push_back({{"clips", set.clips}, {"low_confidence", set.low_confidence}});
  }
  j["representative_clip_sets"] = reps;
  ordered_json good = ordered_json::array();
  for (const auto& subset : est.good_subset_sets) {
    good.push_back({{"clips", subset.clips},
                    {"exhaustivity", subset.exhaustivity},
                    {"exclusivity", subset.exclusivity}});
  }
  j["good_subsets"] = good;
  return j;
}

}  // namespace psim::cli
