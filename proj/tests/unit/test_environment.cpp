#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "psim/environment.hpp"

using namespace psim;

namespace {

std::vector<std::vector<int>> all_value_vectors(const Environment& env) {
  std::vector<std::vector<int>> out;
  for (SetupId s = 0; s < env.num_setups(); ++s) {
    const auto v = env.value_vector(s);
    out.emplace_back(v.begin(), v.end());
  }
  return out;
}

}  // namespace

TEST_CASE("default environment has the expected component counts") {
  const Environment env = Environment::build({});
  CHECK(env.num_setups() == 27);
  CHECK(env.num_experiments() == 6);
  CHECK(env.num_predictions() == 18);
}

TEST_CASE("degenerate single-point environment") {
  EnvConfig cfg;
  cfg.num_variables = 1;
  cfg.values_per_variable = 1;
  cfg.experiments_per_variable = 1;
  const Environment env = Environment::build(cfg);
  CHECK(env.num_setups() == 1);
  CHECK(env.num_experiments() == 1);
  CHECK(env.num_predictions() == 1);
  CHECK(env.evaluate(0, {0, 0}) == 1);
}

TEST_CASE("label assignment depends on the seed but spans the same vectors") {
  EnvConfig cfg;
  cfg.num_variables = 2;
  cfg.values_per_variable = 2;
  cfg.experiments_per_variable = 1;
  cfg.seed = 0;
  const Environment a = Environment::build(cfg);
  cfg.seed = 1;
  const Environment b = Environment::build(cfg);

  auto va = all_value_vectors(a);
  auto vb = all_value_vectors(b);
  CHECK(va != vb);  // different bijections
  std::sort(va.begin(), va.end());
  std::sort(vb.begin(), vb.end());
  CHECK(va == vb);  // same multiset of value vectors
  CHECK(va.size() == 4);
  CHECK(std::set<std::vector<int>>(va.begin(), va.end()).size() == 4);
}

TEST_CASE("rebuilding with the same config and seed is bit-identical") {
  EnvConfig cfg;
  cfg.seed = 123;
  const Environment a = Environment::build(cfg);
  const Environment b = Environment::build(cfg);
  CHECK(all_value_vectors(a) == all_value_vectors(b));
  std::ostringstream ta, tb;
  a.write_setup_table(ta);
  b.write_setup_table(tb);
  CHECK(ta.str() == tb.str());
}

TEST_CASE("setup sampling is uniform and seed-deterministic") {
  const Environment env = Environment::build({});

  SUBCASE("frequencies over 1e6 draws") {
    Rng rng(7);
    std::vector<int> counts(27, 0);
    const int n = 1'000'000;
    for (int k = 0; k < n; ++k) ++counts[env.sample_setup(rng)];
    for (int c : counts) {
      CHECK(std::abs(static_cast<double>(c) / n - 1.0 / 27) < 0.005);
    }
  }

  SUBCASE("single-setup environment always yields label 0") {
    EnvConfig cfg;
    cfg.num_variables = 1;
    cfg.values_per_variable = 1;
    const Environment tiny = Environment::build(cfg);
    Rng rng(3);
    for (int k = 0; k < 100; ++k) CHECK(tiny.sample_setup(rng) == 0);
  }

  SUBCASE("identical draw sequence for identical seeds") {
    Rng r1(42), r2(42);
    for (int k = 0; k < 1000; ++k) CHECK(env.sample_setup(r1) == env.sample_setup(r2));
  }
}

TEST_CASE("correct_outcome reads the tested variable's value") {
  const Environment env = Environment::build({});

  SUBCASE("outcome equals the hidden value for every setup and experiment") {
    for (SetupId s = 0; s < env.num_setups(); ++s) {
      for (int e = 0; e < env.num_experiments(); ++e) {
        CHECK(env.correct_outcome(s, e) == env.value_vector(s)[env.variable_of_experiment(e)]);
      }
    }
  }

  SUBCASE("setup with value vector (2,0,1), experiment testing variable 1") {
    SetupId target = -1;
    for (SetupId s = 0; s < env.num_setups(); ++s) {
      const auto v = env.value_vector(s);
      if (v[0] == 2 && v[1] == 0 && v[2] == 1) target = s;
    }
    REQUIRE(target >= 0);
    for (int e = 0; e < env.num_experiments(); ++e) {
      if (env.variable_of_experiment(e) == 1) CHECK(env.correct_outcome(target, e) == 0);
    }
  }

  SUBCASE("experiments testing the same variable agree on every setup") {
    for (int e1 = 0; e1 < env.num_experiments(); ++e1) {
      for (int e2 = e1 + 1; e2 < env.num_experiments(); ++e2) {
        if (env.variable_of_experiment(e1) != env.variable_of_experiment(e2)) continue;
        for (SetupId s = 0; s < env.num_setups(); ++s) {
          CHECK(env.correct_outcome(s, e1) == env.correct_outcome(s, e2));
        }
      }
    }
  }

  SUBCASE("every experiment splits the 27 setups into three classes of 9") {
    for (int e = 0; e < env.num_experiments(); ++e) {
      std::map<int, int> sizes;
      for (SetupId s = 0; s < env.num_setups(); ++s) ++sizes[env.correct_outcome(s, e)];
      CHECK(sizes.size() == 3);
      for (const auto& [outcome, n] : sizes) CHECK(n == 9);
    }
  }

  SUBCASE("out-of-range arguments are rejected") {
    CHECK_THROWS_AS(env.correct_outcome(-1, 0), std::out_of_range);
    CHECK_THROWS_AS(env.correct_outcome(27, 0), std::out_of_range);
    CHECK_THROWS_AS(env.correct_outcome(0, 6), std::out_of_range);
  }
}

TEST_CASE("evaluate rewards exactly the correct predictions") {
  const Environment env = Environment::build({});

  SUBCASE("exactly 6 of the 18 predictions are rewarded for any setup") {
    for (SetupId s = 0; s < env.num_setups(); ++s) {
      int rewarded = 0;
      std::vector<int> per_experiment(env.num_experiments(), 0);
      for (int flat = 0; flat < env.num_predictions(); ++flat) {
        const PredictionId p = PredictionId::from_flat(flat, 3);
        if (env.evaluate(s, p)) {
          ++rewarded;
          ++per_experiment[p.experiment];
        }
      }
      CHECK(rewarded == 6);
      for (int n : per_experiment) CHECK(n == 1);  // one per experiment
    }
  }

  SUBCASE("random predictions are rewarded at the chance rate 1/3") {
    Rng rng(11);
    int rewarded = 0;
    const int n = 200'000;
    for (int k = 0; k < n; ++k) {
      const SetupId s = env.sample_setup(rng);
      const PredictionId p = PredictionId::from_flat(static_cast<int>(rng.below(18)), 3);
      rewarded += env.evaluate(s, p);
    }
    CHECK(std::abs(static_cast<double>(rewarded) / n - 1.0 / 3) < 0.01);
  }

  SUBCASE("correct experiment but wrong outcome gives no reward") {
    const int correct = env.correct_outcome(5, 2);
    CHECK(env.evaluate(5, {2, (correct + 1) % 3}) == 0);
  }
}

TEST_CASE("same-variable experiments induce identical setup partitions") {
  EnvConfig cfg;
  cfg.seed = 99;
  for (bool permute : {false, true}) {
    cfg.permute_experiments = permute;
    const Environment env = Environment::build(cfg);
    for (int e1 = 0; e1 < env.num_experiments(); ++e1) {
      for (int e2 = 0; e2 < env.num_experiments(); ++e2) {
        bool identical = true;
        for (SetupId s = 0; s < env.num_setups(); ++s) {
          if (env.correct_outcome(s, e1) != env.correct_outcome(s, e2)) {
            identical = false;
            break;
          }
        }
        const bool same_variable =
            env.variable_of_experiment(e1) == env.variable_of_experiment(e2);
        CHECK(identical == same_variable);
      }
    }
  }
}

TEST_CASE("experiment permutation keeps each variable covered") {
  EnvConfig cfg;
  cfg.permute_experiments = true;
  cfg.seed = 5;
  const Environment env = Environment::build(cfg);
  std::map<int, int> per_variable;
  for (int e = 0; e < env.num_experiments(); ++e) ++per_variable[env.variable_of_experiment(e)];
  CHECK(per_variable.size() == 3);
  for (const auto& [variable, n] : per_variable) CHECK(n == 2);
}

TEST_CASE("equal-size outcome classes in every environment") {
  for (const auto& [v, o, et] : std::vector<std::tuple<int, int, int>>{
           {2, 2, 1}, {2, 3, 2}, {3, 2, 2}, {1, 4, 3}}) {
    EnvConfig cfg;
    cfg.num_variables = v;
    cfg.values_per_variable = o;
    cfg.experiments_per_variable = et;
    cfg.seed = 21;
    const Environment env = Environment::build(cfg);
    for (int e = 0; e < env.num_experiments(); ++e) {
      std::map<int, int> sizes;
      for (SetupId s = 0; s < env.num_setups(); ++s) ++sizes[env.correct_outcome(s, e)];
      CHECK(static_cast<int>(sizes.size()) == o);
      for (const auto& [outcome, n] : sizes) CHECK(n == env.num_setups() / o);
    }
  }
}

TEST_CASE("invalid environment configurations are rejected") {
  EnvConfig cfg;
  cfg.num_variables = 0;
  CHECK_THROWS_AS(Environment::build(cfg), std::invalid_argument);
  cfg = {};
  cfg.values_per_variable = 0;
  CHECK_THROWS_AS(Environment::build(cfg), std::invalid_argument);
  cfg = {};
  cfg.experiments_per_variable = 0;
  CHECK_THROWS_AS(Environment::build(cfg), std::invalid_argument);
  cfg = {};
  cfg.num_variables = 64;  // value-vector space overflows any setup index
  cfg.values_per_variable = 3;
  CHECK_THROWS_AS(Environment::build(cfg), std::invalid_argument);
}

TEST_CASE("setup table export is a deterministic CSV") {
  EnvConfig cfg;
  cfg.num_variables = 2;
  cfg.values_per_variable = 2;
  cfg.experiments_per_variable = 1;
  cfg.seed = 4;
  const Environment env = Environment::build(cfg);
  std::ostringstream os;
  env.write_setup_table(os);
  const std::string text = os.str();
  CHECK(text.rfind("setup,value0,value1\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);  // header + 4 rows
}
