// Copyright 2026 The pwlopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pwlopt/exp3_continuous.hpp"
#include "pwlopt/experiment.hpp"
#include "support.hpp"

using namespace pwlopt;

namespace {

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

std::string config_error(const std::string& toml) {
  try {
    parse_config(toml, "exp.toml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

ExperimentConfig small_config(EnvKind env) {
  ExperimentConfig c;
  c.env = env;
  c.horizons = {0, 50, 200};
  c.seeds = {1, 2, 3};
  c.timing = false;
  c.threads = 2;
  return c;
}

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse_config(R"(
env = "clustering"
learner = "discretized"
regime = "bandit"
T = [100, 400]
seeds = [4, 5]
master_seed = 9
lambda = 0.25
timing = false

[clustering]
n = 10
k = 3
kappa = 4.0

[dispersion]
eps_count = 3
)");
  CHECK(c.env == EnvKind::clustering);
  CHECK(c.learner == LearnerKind::discretized);
  CHECK(c.regime == Regime::bandit);
  CHECK(c.horizons == std::vector<std::size_t>{100, 400});
  CHECK(c.seeds == std::vector<std::uint64_t>{4, 5});
  CHECK(c.master_seed == 9);
  CHECK(*c.lambda == 0.25);
  CHECK_FALSE(c.timing);
  CHECK(c.clustering.points == 10);
  CHECK(c.clustering.clusters == 3);
  CHECK(c.clustering.kappa == 4.0);
  CHECK(c.dispersion.eps_count == 3);
}

TEST_CASE("config errors carry their position") {
  const std::string syntax = config_error("env = \"knapsack\"\nT = [10,\nseeds = 1\n");
  CHECK(contains(syntax, "exp.toml:3:"));
  const std::string type = config_error("env = \"knapsack\"\n\nT = \"many\"\n");
  CHECK(contains(type, "exp.toml:3:"));
  CHECK(contains(type, "'T'"));
  const std::string unknown = config_error("[knapsack]\nn = 4\nwidth = 3\n");
  CHECK(contains(unknown, "exp.toml:3:"));
  CHECK(contains(unknown, "knapsack.width"));
  const std::string env = config_error("env = \"maze\"\n");
  CHECK(contains(env, "exp.toml:1:"));
  CHECK(contains(config_error("[a]\n[a.b]\nc = 1\n"), "nesting"));
  CHECK(contains(config_error("seeds = [1, 1]\n"), "distinct"));
  CHECK(contains(config_error("lambda = 1.5\n"), "lambda"));
  CHECK(contains(config_error("regime = \"bandit\"\n"), "discretized"));
  CHECK(contains(config_error("[clustering]\nn = 3\nk = 4\n"), "clustering.k"));
  CHECK(contains(config_error("r = 5.0\n"), "'r'"));
  CHECK(contains(config_error("T = [-5]\n"), "'T'"));
  CHECK_THROWS_AS(load_config("/nonexistent/exp.toml"), std::runtime_error);
}

TEST_CASE("overrides") {
  ExperimentConfig c;
  apply_setting(c, "T", "10, 20,30");
  CHECK(c.horizons == std::vector<std::size_t>{10, 20, 30});
  apply_setting(c, "knapsack.C", "12.5");
  CHECK(c.knapsack.capacity == 12.5);
  apply_setting(c, "knapsack.fresh_instances", "true");
  CHECK(c.knapsack.fresh_instances);
  apply_setting(c, "synthetic.constant_loss", "0.5");
  CHECK(*c.synthetic.constant_loss == 0.5);
  CHECK_THROWS_AS(apply_setting(c, "knapsack.n", "0"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "knapsack.C", "abc"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "timing", "maybe"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "colour", "red"), ConfigError);
  c.learner = LearnerKind::discretized;
  c.r = c.knapsack.range / 2;
  CHECK_NOTHROW(validate(c));
  c.learner = LearnerKind::continuous;
  CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("best in hindsight examples") {
  const ParamSpace1D unit(0.0, 1.0);
  const Partition one{{unit.cell(0.0, 0.3), 0.8}, {unit.cell(0.3, 0.7), 0.2}, {unit.cell(0.7, 1.0), 0.5}};
  const HindsightOptimum a = best_in_hindsight(std::vector<Partition>{one}, unit);
  CHECK(a.total_loss == doctest::Approx(0.2));
  CHECK(a.rho == doctest::Approx(0.5));
  CHECK_FALSE(a.grid_fallback);

  const Partition left{{unit.cell(0.0, 0.5), 0.0}, {unit.cell(0.5, 1.0), 1.0}};
  const Partition right{{unit.cell(0.0, 0.5), 1.0}, {unit.cell(0.5, 1.0), 0.0}};
  const HindsightOptimum b = best_in_hindsight(std::vector<Partition>{left, right}, unit);
  CHECK(b.total_loss == 1.0);
  CHECK(b.rho == doctest::Approx(0.25));  // leftmost of the tied cells

  CHECK_THROWS_AS(best_in_hindsight(std::vector<Partition>{Partition{}}, unit), std::invalid_argument);
  const Partition gap{{unit.cell(0.0, 0.4), 0.1}, {unit.cell(0.5, 1.0), 0.1}};
  CHECK_THROWS_AS(best_in_hindsight(std::vector<Partition>{gap}, unit), std::invalid_argument);
}

TEST_CASE("exact optimum matches a grid oracle on knapsack rounds") {
  ExperimentConfig c;
  c.knapsack.items = 6;
  for (std::uint64_t seed : {1, 2, 3}) {
    auto env = make_environment(c, seed);
    RescaledEnvironment scaled(*env);
    std::vector<Partition> rounds;
    for (std::size_t t = 0; t < 100; ++t) rounds.push_back(*scaled.partition(t));
    const HindsightOptimum exact = best_in_hindsight(rounds, scaled.space());
    // Oracle: direct environment evaluation on a 10^5-point grid.
    const HindsightOptimum grid = grid_best_in_hindsight(scaled, 100, 100000);
    CHECK(grid.grid_fallback);
    CHECK(exact.total_loss <= grid.total_loss + 1e-9);
    double at_rho = 0.0;
    for (std::size_t t = 0; t < 100; ++t) at_rho += scaled.step(exact.rho, t).loss;
    CHECK(at_rho == doctest::Approx(exact.total_loss).epsilon(1e-12));
    // Every cell is wider than the grid spacing here, so the grid finds it too.
    CHECK(grid.total_loss == doctest::Approx(exact.total_loss).epsilon(1e-12));
  }
}

TEST_CASE("exact optimum is below every fixed parameter") {
  Rng rng(71);
  const ParamSpace1D space(-2.0, 3.0);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Partition> rounds;
    for (int t = 0; t < 40; ++t) rounds.push_back(pwltest::random_partition(rng, space, 1 + rng.below(7)));
    const HindsightOptimum opt = best_in_hindsight(rounds, space);
    double at_opt = 0.0;
    for (const Partition& p : rounds) at_opt += pwltest::cell_at(p, opt.rho).loss;
    CHECK(at_opt == doctest::Approx(opt.total_loss).epsilon(1e-12));
    for (int g = 0; g <= 2000; ++g) {
      const double x = space.lo() + space.width() * g / 2000.0;
      double total = 0.0;
      for (const Partition& p : rounds) total += pwltest::cell_at(p, x).loss;
      CHECK(opt.total_loss <= total + 1e-12);
    }
  }
}

TEST_CASE("accumulator prefixes agree with batch optimum") {
  Rng rng(73);
  const ParamSpace1D space(0.0, 1.0);
  HindsightAccumulator acc(space);
  std::vector<Partition> rounds;
  for (int t = 0; t < 50; ++t) {
    rounds.push_back(pwltest::random_partition(rng, space, 5));
    acc.add(rounds.back());
    const HindsightOptimum batch = best_in_hindsight(rounds, space);
    CHECK(acc.best().total_loss == batch.total_loss);
    CHECK(acc.best().rho == batch.rho);
  }
  CHECK(acc.rounds() == 50);
}

TEST_CASE("zero horizon gives zero regret") {
  ExperimentConfig c = small_config(EnvKind::knapsack);
  c.horizons = {0};
  const ExperimentResult r = run_experiment(c);
  REQUIRE(r.records.size() == 3);
  for (const RegretRecord& rec : r.records) {
    CHECK(rec.horizon == 0);
    CHECK(rec.regret == 0.0);
    CHECK(rec.learner_loss == 0.0);
    CHECK(rec.opt_loss == 0.0);
  }
}

TEST_CASE("runs are deterministic and ordered") {
  for (EnvKind env : {EnvKind::knapsack, EnvKind::clustering, EnvKind::synthetic}) {
    ExperimentConfig c = small_config(env);
    c.seeds = {3, 1, 2};
    const std::string a = to_csv(run_experiment(c));
    c.threads = 1;
    const std::string b = to_csv(run_experiment(c));
    CHECK(a == b);
    const ExperimentResult r = run_experiment(c);
    REQUIRE(r.records.size() == 9);
    for (std::size_t i = 1; i < r.records.size(); ++i) {
      CHECK(std::pair(r.records[i - 1].seed, r.records[i - 1].horizon) <
            std::pair(r.records[i].seed, r.records[i].horizon));
    }
    for (const RegretRecord& rec : r.records) {
      CHECK(rec.regret == doctest::Approx(rec.learner_loss - rec.opt_loss).epsilon(1e-14));
      CHECK(rec.opt_loss <= static_cast<double>(rec.horizon));
      CHECK(rec.us_per_round == 0.0);
    }
  }
}

TEST_CASE("csv layout and notes") {
  ExperimentConfig c = small_config(EnvKind::knapsack);
  c.horizons = {100};
  const ExperimentResult r = run_experiment(c);
  const std::string csv = to_csv(r);
  CHECK(contains(csv, "\nseed,T,learner_loss,opt_loss,regret,us_per_round\n"));
  CHECK(csv.rfind("# env=knapsack learner=continuous regime=semi_bandit", 0) == 0);
  CHECK(contains(csv, "# best_in_hindsight=exact\n"));
  // The step size note reports the formula with the largest observed cell count.
  std::size_t max_cells = 1;
  for (std::uint64_t seed : c.seeds) {
    auto env = make_environment(c, mix_seed(c.master_seed, seed));
    for (std::size_t t = 0; t < 100; ++t) max_cells = std::max(max_cells, env->partition(t)->size());
  }
  const double r_used = std::min(0.1, 0.5 * 5.0);
  const double lambda = recommended_lambda(1, 5.0, r_used, 100, static_cast<long long>(max_cells));
  bool found = false;
  for (const std::string& note : r.notes) {
    if (note.rfind("T=100 ", 0) == 0) {
      found = true;
      CHECK(contains(note, "M=" + std::to_string(max_cells)));
      const auto at = note.find("lambda=") + 7;
      CHECK(std::stod(note.substr(at)) == doctest::Approx(lambda).epsilon(1e-9));
    }
  }
  CHECK(found);

  c.timing = true;
  for (const RegretRecord& rec : run_experiment(c).records) CHECK(rec.us_per_round > 0.0);
}

TEST_CASE("traces list every round") {
  ExperimentConfig c = small_config(EnvKind::synthetic);
  c.horizons = {10, 30};
  c.seeds = {1};
  const ExperimentResult r = run_experiment(c, true);
  CHECK(r.trace.rfind("seed,T,round,rho,loss\n", 0) == 0);
  const auto lines = static_cast<std::size_t>(std::count(r.trace.begin(), r.trace.end(), '\n'));
  CHECK(lines == 1 + 10 + 30);
}

TEST_CASE("constant-point play never beats the optimum") {
  // A learner frozen on one parameter is a fixed comparator, so its regret
  // against the exact optimum is non-negative.
  ExperimentConfig c;
  for (EnvKind env : {EnvKind::knapsack, EnvKind::clustering, EnvKind::synthetic}) {
    c.env = env;
    for (std::uint64_t seed : {1, 2}) {
      auto raw = make_environment(c, seed);
      RescaledEnvironment env_scaled(*raw);
      HindsightAccumulator acc(env_scaled.space());
      double fixed = 0.0;
      const double rho = env_scaled.space().lo() + 0.37 * env_scaled.space().width();
      for (std::size_t t = 0; t < 300; ++t) {
        acc.add(*env_scaled.partition(t));
        fixed += env_scaled.step(rho, t).loss;
      }
      CHECK(fixed - acc.best().total_loss >= -1e-12);
    }
  }
}

TEST_CASE("every learner and regime runs") {
  struct Case {
    LearnerKind learner;
    Regime regime;
  };
  for (const Case k : {Case{LearnerKind::continuous, Regime::semi_bandit},
                       Case{LearnerKind::continuous, Regime::full_info},
                       Case{LearnerKind::discretized, Regime::bandit},
                       Case{LearnerKind::discretized, Regime::semi_bandit},
                       Case{LearnerKind::discretized, Regime::full_info}}) {
    ExperimentConfig c = small_config(EnvKind::knapsack);
    c.learner = k.learner;
    c.regime = k.regime;
    const ExperimentResult r = run_experiment(c);
    CHECK(r.records.size() == 9);
    for (const RegretRecord& rec : r.records) {
      CHECK(rec.learner_loss >= 0.0);
      CHECK(rec.learner_loss <= static_cast<double>(rec.horizon));
    }
  }
}

TEST_CASE("full information learns the optimum quickly") {
  ExperimentConfig c = small_config(EnvKind::synthetic);
  c.regime = Regime::full_info;
  c.horizons = {2000};
  c.seeds = {1, 2};
  for (const RegretRecord& rec : run_experiment(c).records) {
    CHECK(rec.regret < 0.1 * static_cast<double>(rec.horizon));
  }
}

TEST_CASE("dispersion runs") {
  ExperimentConfig c;
  c.seeds = {1, 2, 3};
  c.dispersion.horizon = 50;
  c.dispersion.eps_count = 4;
  const DispersionResult r = run_dispersion(c);
  REQUIRE(r.rows.size() == 4);
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    CHECK(r.rows[i].epsilon > r.rows[i - 1].epsilon);
    CHECK(r.rows[i].empirical_mean >= r.rows[i - 1].empirical_mean);
  }
  for (const auto& row : r.rows) CHECK(row.empirical_mean <= 50.0);
  CHECK(r.fitted_constant >= 0.0);
  const std::string csv = to_csv(r);
  CHECK(contains(csv, "epsilon,empirical_mean,empirical_stderr,bound_statement,bound_proof\n"));
  CHECK(csv.rfind("# ", 0) == 0);

  c.env = EnvKind::clustering;
  c.clustering.points = 5;
  CHECK(run_dispersion(c).rows.size() == 4);
  c.env = EnvKind::synthetic;
  CHECK_THROWS_AS(run_dispersion(c), ConfigError);
}
