#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kCli = PSIM_CLI_PATH;

struct CommandResult {
  int exit_code;
  std::string output;
};

CommandResult run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string output;
  char buf[256];
  while (fgets(buf, sizeof(buf), pipe)) output += buf;
  const int status = pclose(pipe);
  return {WEXITSTATUS(status), output};
}

std::string slurp(const fs::path& path) {
  std::ifstream is(path);
  REQUIRE(is);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("psim_cli_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static inline int counter = 0;
};

}  // namespace

TEST_CASE("train writes curves, snapshots and a manifest") {
  TempDir tmp;
  const auto out = tmp.path / "run";
  const auto result = run("train --preset twolayer --ensemble 2 --threads 2 --out " +
                          out.string());
  CHECK(result.exit_code == 0);
  for (const char* name : {"curve_agent0.csv", "curve_agent1.csv", "agent0.snap", "agent1.snap",
                           "summary.json", "manifest.json"}) {
    CHECK(fs::exists(out / name));
  }

  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["command"] == "train");
  CHECK(manifest["architecture"] == "two_layer");
  CHECK(manifest["training"]["total_rounds"] == 10000);
  CHECK(manifest["training"]["eval_interval"].get<long long>() > 0);  // fully resolved

  const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
  CHECK(summary["metrics"]["final_reward_rate"]["per_agent"].size() == 2);

  const std::string curve = slurp(out / "curve_agent0.csv");
  CHECK(curve.rfind("round,reward_rate\n", 0) == 0);
}

TEST_CASE("analyze emits figure data and the estimate") {
  TempDir tmp;
  const auto train_out = tmp.path / "run";
  REQUIRE(run("train --preset default3x2x3 --rounds 300000 --out " + train_out.string())
              .exit_code == 0);

  const auto analysis_out = tmp.path / "analysis";
  const auto result = run("analyze --snapshot " + (train_out / "agent0.snap").string() +
                          " --out " + analysis_out.string());
  CHECK(result.exit_code == 0);
  for (const char* name : {"scatter.csv", "predictability.csv", "correlation.csv",
                           "estimate.json", "h1_sorted.csv", "h2_sorted.csv", "manifest.json"}) {
    CHECK(fs::exists(analysis_out / name));
  }
  const auto estimate = nlohmann::json::parse(slurp(analysis_out / "estimate.json"));
  CHECK(estimate["est_num_variables"].get<double>() == 3.0);
  CHECK(estimate["variable_blocks"].size() == 3);
  CHECK(estimate.contains("blocks_at_tau"));

  const std::string scatter = slurp(analysis_out / "scatter.csv");
  CHECK(scatter.rfind("cardinality,exhaustivity,exclusivity,clips\n", 0) == 0);
  // 501 subsets + header
  CHECK(std::count(scatter.begin(), scatter.end(), '\n') == 502);

  SUBCASE("a fresh snapshot has no identifiable structure") {
    const auto fresh_out = tmp.path / "fresh";
    REQUIRE(run("train --preset default3x2x3 --rounds 0 --out " + fresh_out.string())
                .exit_code == 0);
    const auto fresh_analysis = tmp.path / "fresh_analysis";
    REQUIRE(run("analyze --snapshot " + (fresh_out / "agent0.snap").string() + " --out " +
                fresh_analysis.string())
                .exit_code == 0);
    const auto fresh = nlohmann::json::parse(slurp(fresh_analysis / "estimate.json"));
    CHECK(fresh["good_subsets"].empty());
    // Uniform weights predict nothing: every predictability entry is zero
    // up to floating-point slack.
    std::istringstream table(slurp(fresh_analysis / "predictability.csv"));
    std::string line;
    std::getline(table, line);  // header
    while (std::getline(table, line)) {
      std::istringstream cells(line);
      std::string cell;
      std::getline(cells, cell, ',');  // row label
      while (std::getline(cells, cell, ',')) {
        CHECK(std::abs(std::stod(cell)) < 1e-12);
      }
    }
  }
}

TEST_CASE("exit codes distinguish config, i/o and data failures") {
  TempDir tmp;
  SUBCASE("missing config file is an i/o failure") {
    const auto result =
        run("train --config " + (tmp.path / "absent.json").string() + " --out " +
            (tmp.path / "x").string());
    CHECK(result.exit_code == 2);
  }
  SUBCASE("bad flag values are config failures") {
    CHECK(run("train --gamma 2.0 --out " + (tmp.path / "x").string()).exit_code == 1);
    CHECK(run("train --preset nosuch --out " + (tmp.path / "x").string()).exit_code == 1);
    CHECK(run("nosuchcommand").exit_code == 1);
  }
  SUBCASE("corrupt snapshots are data failures, with no partial outputs") {
    const auto bad = tmp.path / "bad.snap";
    std::ofstream(bad) << "garbage\n";
    const auto out = tmp.path / "analysis";
    const auto result = run("analyze --snapshot " + bad.string() + " --out " + out.string());
    CHECK(result.exit_code == 3);
    CHECK(result.output.find("line 1") != std::string::npos);
    CHECK_FALSE(fs::exists(out / "estimate.json"));
  }
  SUBCASE("two-layer snapshots are rejected for subset analysis, with an explanation") {
    const auto out = tmp.path / "run";
    REQUIRE(run("train --preset twolayer --rounds 100 --window 10 --out " + out.string())
                .exit_code == 0);
    const auto result = run("analyze --snapshot " + (out / "agent0.snap").string() + " --out " +
                            (tmp.path / "a").string());
    CHECK(result.exit_code == 3);
    CHECK(result.output.find("two-layer") != std::string::npos);
    CHECK(result.output.find("intermediate") != std::string::npos);
  }
}

TEST_CASE("config files overlay presets and flags override both") {
  TempDir tmp;
  const auto config = tmp.path / "config.json";
  std::ofstream(config) << R"({
    "environment": {"num_variables": 2, "seed": 7},
    "training": {"total_rounds": 5000, "curve_window": 100},
    "agent": {"gamma": 0.001}
  })";
  const auto out = tmp.path / "run";
  const auto result = run("train --preset default3x2x3 --config " + config.string() +
                          " --rounds 2000 --out " + out.string());
  CHECK(result.exit_code == 0);
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["environment"]["num_variables"] == 2);   // from config
  CHECK(manifest["environment"]["seed"] == 7);            // from config
  CHECK(manifest["training"]["total_rounds"] == 2000);    // flag wins
  CHECK(manifest["agent"]["gamma"].get<double>() == 0.001);
}

TEST_CASE("generalize reruns are byte-identical for a fixed seed") {
  TempDir tmp;
  const std::string args =
      " --rounds 30000 --ensemble 2 --threads 2 --holdout-setup 0 --holdout-experiment 0 "
      "--twolayer-rounds 2000 --seed 11";
  const auto a = tmp.path / "a";
  const auto b = tmp.path / "b";
  REQUIRE(run("generalize --preset default3x2x3" + args + " --out " + a.string()).exit_code == 0);
  REQUIRE(run("generalize --preset default3x2x3" + args + " --out " + b.string()).exit_code == 0);

  int compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    ++compared;
    CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
  }
  CHECK(compared >= 10);  // curves + snapshots for both architectures, summary, manifest

  const auto summary = nlohmann::json::parse(slurp(a / "summary.json"));
  CHECK(summary["two_layer"]["final_holdout_success"]["mean"].get<double>() ==
        doctest::Approx(1.0 / 3).epsilon(1e-12));
  const std::string curve = slurp(a / "threelayer_curve_agent0.csv");
  CHECK(curve.rfind("round,reward_rate,holdout_success\n", 0) == 0);
}

TEST_CASE("scan handles preset lists and empty sweeps") {
  TempDir tmp;
  SUBCASE("empty sweep is a no-op succeeding") {
    const auto out = tmp.path / "scan";
    const auto result = run("scan --out " + out.string());
    CHECK(result.exit_code == 0);
    const std::string csv = slurp(out / "scan.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1);  // header only
  }
  SUBCASE("one-preset sweep emits metric rows and continues past failures") {
    const auto sweep = tmp.path / "sweep.json";
    std::ofstream(sweep) << R"([{"preset": "v2", "total_rounds": 20000}, {"preset": "nosuch"}])";
    const auto out = tmp.path / "scan";
    const auto result = run("scan --sweep " + sweep.string() + " --ensemble 2 --threads 2 --out " +
                            out.string());
    CHECK(result.exit_code == 3);  // the bad preset is reported
    CHECK(result.output.find("nosuch") != std::string::npos);
    const std::string csv = slurp(out / "scan.csv");
    CHECK(csv.find("v2,2,3,2,20000,final_reward_rate,") != std::string::npos);
    CHECK(csv.find("nosuch,,,,,error,,") != std::string::npos);
    CHECK(fs::exists(out / "v2" / "summary.json"));
  }
}

TEST_CASE("env exports the hidden setup table for debugging") {
  TempDir tmp;
  const auto table = tmp.path / "table.csv";
  REQUIRE(run("env --variables 2 --values 2 --experiments-per-variable 1 --env-seed 3 --out " +
              table.string())
              .exit_code == 0);
  const std::string text = slurp(table);
  CHECK(text.rfind("setup,value0,value1\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);

  const auto table2 = tmp.path / "table2.csv";
  REQUIRE(run("env --variables 2 --values 2 --experiments-per-variable 1 --env-seed 3 --out " +
              table2.string())
              .exit_code == 0);
  CHECK(slurp(table2) == text);
}

TEST_CASE("checkpointed runs can resume and reproduce the straight run") {
  TempDir tmp;
  const std::string common =
      "train --preset default3x2x3 --rounds 20000 --window 500 --eval-interval 1000 --seed 5 ";
  const auto straight = tmp.path / "straight";
  REQUIRE(run(common + "--checkpoint-every 5000 --out " + straight.string()).exit_code == 0);
  REQUIRE(fs::exists(straight / "checkpoints" / "agent0.snap"));

  // Simulate an interrupted run: only the checkpoints survive.
  const auto resumed = tmp.path / "resumed";
  fs::create_directories(resumed);
  fs::copy(straight / "checkpoints", resumed / "checkpoints");
  REQUIRE(run(common + "--resume --out " + resumed.string()).exit_code == 0);

  CHECK(slurp(resumed / "curve_agent0.csv") == slurp(straight / "curve_agent0.csv"));
  CHECK(slurp(resumed / "agent0.snap") == slurp(straight / "agent0.snap"));
}
