#include <filesystem>
#include <iostream>

#include "commands.hpp"
#include "psim/csv.hpp"
#include "psim/snapshot.hpp"

namespace psim::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void write_scatter_csv(std::ostream& os, const std::vector<SubsetScore>& scores) {
  os << "cardinality,exhaustivity,exclusivity,clips\n";
  for (const SubsetScore& s : scores) {
    os << s.clips.size() << ',' << format_double(s.exhaustivity) << ','
       << format_double(s.exclusivity) << ',';
    for (std::size_t k = 0; k < s.clips.size(); ++k) {
      if (k) os << '|';
      os << s.clips[k];
    }
    os << '\n';
  }
}

Matrix permute_columns(const Matrix& m, const std::vector<int>& order) {
  Matrix out(m.rows(), m.cols());
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) out(r, c) = m(r, order[c]);
  }
  return out;
}

}  // namespace

int cmd_analyze(const AnalyzeOptions& options) {
  if (!fs::exists(options.snapshot_path)) {
    throw IoError("snapshot not found: " + options.snapshot_path);
  }
  const Snapshot snap = load_snapshot_file(options.snapshot_path);

  if (snap.net.architecture() == Architecture::two_layer) {
    std::cerr << "psim analyze: this is a two-layer snapshot; it has no intermediate clips, so "
                 "the subset measures and predictability profiles that identify variables do "
                 "not apply. Train a three-layer agent to analyze.\n";
    return kExitData;
  }

  const fs::path out_dir(options.out_dir);
  ensure_dir(out_dir);
  std::vector<std::string> outputs;

  const Matrix p1 = row_normalized(snap.net.h1());
  const Matrix p2 = row_normalized(snap.net.h2());
  const ActionLayout layout{snap.net.num_experiments(), snap.net.values_per_variable()};

  const std::vector<SubsetScore> scores =
      subset_scan(p1, options.thresholds.subset_cap, options.threads);
  {
    auto os = open_out(out_dir / "scatter.csv");
    write_scatter_csv(os, scores);
    outputs.push_back("scatter.csv");
  }

  const PredictabilityTable table = predictability_table(p2, layout);
  {
    auto os = open_out(out_dir / "predictability.csv");
    write_matrix_csv(os, table.values, "clip", "e");
    outputs.push_back("predictability.csv");
  }
  const CorrelationMatrix corr = correlation_matrix(table, options.thresholds.method);
  {
    auto os = open_out(out_dir / "correlation.csv");
    write_matrix_csv(os, corr.values, "experiment", "e");
    outputs.push_back("correlation.csv");
  }

  const EnvironmentEstimate estimate = estimate_environment(p1, p2, layout, options.thresholds);

  ordered_json est_json = estimate_to_json(estimate);
  ordered_json blocks_at_tau = ordered_json::object();
  for (double tau : {0.3, 0.5, 0.7}) {
    blocks_at_tau[format_double(tau)] =
        extract_blocks(corr, tau).size();
  }
  est_json["blocks_at_tau"] = blocks_at_tau;
  {
    auto os = open_out(out_dir / "estimate.json");
    os << est_json.dump(2) << '\n';
    outputs.push_back("estimate.json");
  }

  // h-matrices with intermediate clips regrouped by identified variable.
  const std::vector<int> order = display_clip_order(estimate, p2, layout);
  {
    auto os = open_out(out_dir / "h1_sorted.csv");
    write_matrix_csv(os, permute_columns(snap.net.h1(), order), "setup", "clip");
    outputs.push_back("h1_sorted.csv");
  }
  {
    auto os = open_out(out_dir / "h2_sorted.csv");
    write_matrix_csv_ordered(os, snap.net.h2(), order, "clip", "p");
    outputs.push_back("h2_sorted.csv");
  }

  RunSpec spec;
  spec.analysis = options.thresholds;
  spec.threads = options.threads;
  spec.architecture = snap.net.architecture();
  spec.agent = snap.agent;
  write_manifest(spec, "analyze", out_dir, outputs,
                 ordered_json{{"snapshot", options.snapshot_path}});
  return kExitOk;
}

}  // namespace psim::cli
