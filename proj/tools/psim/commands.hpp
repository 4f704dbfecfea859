#pragma once

#include <optional>
#include <string>
#include <vector>

#include "common.hpp"

namespace psim::cli {

struct TrainOptions {
  RunSpec spec;
  std::string out_dir = "out";
  long long checkpoint_every = -1;  // -1: auto (T/10 for runs of 1e7+ rounds), 0: off
  bool resume = false;
  bool dump_env_table = false;
};

struct AnalyzeOptions {
  std::string snapshot_path;
  std::string out_dir = "out";
  AnalysisThresholds thresholds;
  int threads = 1;
};

struct GeneralizeOptions {
  RunSpec spec;  // three-layer side; the two-layer baseline is derived
  std::string out_dir = "out";
  long long twolayer_rounds = 10'000;
  long long twolayer_window = 1'000;
};

struct ScanOptions {
  std::vector<std::string> presets;
  std::string sweep_file;
  std::string out_dir = "out";
  int ensemble_size = 0;  // 0: keep each preset's own
  std::uint64_t base_seed = 0;
  int threads = 1;
};

struct EnvOptions {
  RunSpec spec;
  std::string out_path = "env_table.csv";
};

int cmd_train(const TrainOptions& options);
int cmd_analyze(const AnalyzeOptions& options);
int cmd_generalize(const GeneralizeOptions& options);
int cmd_scan(const ScanOptions& options);
int cmd_env(const EnvOptions& options);

}  // namespace psim::cli
