#include <filesystem>
#include <fstream>
#include <iostream>

#include "commands.hpp"
#include "psim/csv.hpp"

namespace psim::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

struct SweepEntry {
  std::string preset;
  std::optional<long long> rounds;
};

std::vector<SweepEntry> load_sweep(const ScanOptions& options) {
  std::vector<SweepEntry> entries;
  for (const std::string& name : options.presets) entries.push_back({name, std::nullopt});
  if (options.sweep_file.empty()) return entries;

  std::ifstream is(options.sweep_file);
  if (!is) throw IoError("cannot open sweep file: " + options.sweep_file);
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("sweep file parse error: " + std::string(e.what()));
  }
  const json& list = doc.is_array() ? doc : doc.at("sweeps");
  for (const json& item : list) {
    SweepEntry entry;
    if (item.is_string()) {
      entry.preset = item.get<std::string>();
    } else {
      entry.preset = item.at("preset").get<std::string>();
      if (item.contains("total_rounds")) {
        entry.rounds = item["total_rounds"].get<long long>();
      }
    }
    entries.push_back(entry);
  }
  return entries;
}

}  // namespace

int cmd_scan(const ScanOptions& options) {
  const std::vector<SweepEntry> entries = load_sweep(options);
  const fs::path out_dir(options.out_dir);
  ensure_dir(out_dir);

  auto csv = open_out(out_dir / "scan.csv");
  csv << "preset,num_variables,values_per_variable,experiments_per_variable,total_rounds,"
         "metric,mean,std\n";

  bool any_failed = false;
  for (const SweepEntry& entry : entries) {
    RunSpec spec;
    try {
      apply_preset(spec, entry.preset);
      if (entry.rounds) spec.train.total_rounds = *entry.rounds;
      if (options.ensemble_size > 0) spec.train.ensemble_size = options.ensemble_size;
      spec.train.base_seed = options.base_seed;
      spec.threads = options.threads;

      const Environment env = Environment::build(spec.env);
      const EnsembleResult result = run_ensemble(env, spec.architecture, spec.agent, spec.train,
                                                 spec.threads, spec.analysis);

      for (const auto& [name, stats] : result.metrics) {
        csv << entry.preset << ',' << spec.env.num_variables << ','
            << spec.env.values_per_variable << ',' << spec.env.experiments_per_variable << ','
            << spec.train.total_rounds << ',' << name << ',' << format_double(stats.mean) << ','
            << format_double(stats.stddev) << '\n';
      }

      ordered_json summary;
      for (const auto& [name, stats] : result.metrics) summary[name] = metric_to_json(stats);
      const fs::path preset_dir = out_dir / entry.preset;
      ensure_dir(preset_dir);
      auto os = open_out(preset_dir / "summary.json");
      os << summary.dump(2) << '\n';
      write_manifest(spec, "scan:" + entry.preset, preset_dir, {"summary.json"});
    } catch (const std::exception& e) {
      any_failed = true;
      std::cerr << "psim scan: preset '" << entry.preset << "' failed: " << e.what() << "\n";
      csv << entry.preset << ",,,,,error,,\n";
    }
  }

  RunSpec manifest_spec;
  manifest_spec.threads = options.threads;
  ordered_json extra;
  extra["presets"] = ordered_json::array();
  for (const SweepEntry& entry : entries) extra["presets"].push_back(entry.preset);
  write_manifest(manifest_spec, "scan", out_dir, {"scan.csv"}, extra);
  return any_failed ? kExitData : kExitOk;
}

}  // namespace psim::cli
