#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "psim/analysis.hpp"
#include "psim/ecm.hpp"
#include "psim/environment.hpp"
#include "psim/presets.hpp"
#include "psim/training.hpp"

namespace psim::cli {

inline constexpr const char* kToolVersion = "psim 0.1.0";

// Exit code classes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;  // bad flags, bad config values
inline constexpr int kExitIo = 2;      // missing/unreadable/unwritable files
inline constexpr int kExitData = 3;    // corrupt snapshots, analysis errors

/// Everything a run needs, fully resolved; also what the manifest records.
struct RunSpec {
  EnvConfig env;
  Architecture architecture = Architecture::three_layer;
  int num_intermediate = 0;  // 0: variables x values
  AgentConfig agent;
  TrainConfig train;
  AnalysisThresholds analysis;
  int threads = 1;
};

/// Error in user-supplied configuration (maps to kExitConfig).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem-level failure (maps to kExitIo).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Apply a preset by name. Throws ConfigError for unknown names.
void apply_preset(RunSpec& spec, const std::string& name);

/// Overlay a JSON config file (sections: environment, architecture,
/// num_intermediate, agent, training, analysis). Throws ConfigError with
/// key diagnostics, IoError if unreadable.
void apply_config_file(RunSpec& spec, const std::string& path);

nlohmann::ordered_json spec_to_json(const RunSpec& spec);

/// Create the directory (if needed) and write manifest.json. `extra` is
/// merged into the manifest for command-specific fields (input paths etc.).
void write_manifest(const RunSpec& spec, const std::string& command,
                    const std::filesystem::path& out_dir,
                    const std::vector<std::string>& outputs,
                    const nlohmann::ordered_json& extra = {});

void ensure_dir(const std::filesystem::path& dir);

/// Open for writing or throw IoError.
std::ofstream open_out(const std::filesystem::path& path);

nlohmann::ordered_json metric_to_json(const MetricStats& stats);
nlohmann::ordered_json estimate_to_json(const EnvironmentEstimate& est);

std::string architecture_name(Architecture arch);

}  // namespace psim::cli
