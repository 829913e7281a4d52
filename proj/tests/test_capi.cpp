// Copyright 2026 The pwlopt Authors
// SPDX-License-Identifier: Apache-2.0

// Exercises the shared library through its C interface only.

#include <doctest.h>
#include <pwlopt/pwl.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

namespace {

bool ok(pwl_status s) { return s == PWL_OK; }

std::string take(char* text) {
  std::string out = text ? text : "";
  pwl_string_free(text);
  return out;
}

bool contains(const std::string& text, const std::string& part) {
  return text.find(part) != std::string::npos;
}

std::string write_temp(const std::string& name, const std::string& body) {
  const std::string path = "capi_" + name;
  std::FILE* f = std::fopen(path.c_str(), "w");
  REQUIRE(f != nullptr);
  std::fputs(body.c_str(), f);
  std::fclose(f);
  return path;
}

// Output key of a step function with jumps at 0.3 and 0.7.
int step_key(void* context, double rho, uint64_t* key) {
  ++*static_cast<int*>(context);
  *key = rho < 0.3 ? 0 : (rho < 0.7 ? 1 : 2);
  return 0;
}

int failing_key(void*, double, uint64_t*) { return 1; }

}  // namespace

TEST_CASE("status names and errors") {
  CHECK(std::string(pwl_status_name(PWL_OK)) == "ok");
  CHECK(std::string(pwl_status_name(PWL_ERR_PARSE)) == "parse error");
  CHECK(std::strlen(pwl_version()) > 0);
  pwl_weights* w = nullptr;
  CHECK(pwl_weights_create(1.0, 0.0, PWL_BACKEND_TREE, &w) == PWL_ERR_INVALID_ARGUMENT);
  CHECK(w == nullptr);
  CHECK(std::strlen(pwl_last_error()) > 0);
  CHECK(pwl_weights_create(0.0, 1.0, PWL_BACKEND_TREE, nullptr) == PWL_ERR_INVALID_ARGUMENT);
  pwl_string_free(nullptr);
}

TEST_CASE("rng and seed mixing") {
  pwl_rng* a = nullptr;
  pwl_rng* b = nullptr;
  REQUIRE(ok(pwl_rng_create(5, &a)));
  REQUIRE(ok(pwl_rng_create(5, &b)));
  for (int i = 0; i < 100; ++i) {
    const double x = pwl_rng_uniform(a);
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    CHECK(x == pwl_rng_uniform(b));
  }
  pwl_rng_destroy(a);
  pwl_rng_destroy(b);
  CHECK(pwl_mix_seed(1, 2) == pwl_mix_seed(1, 2));
  CHECK(pwl_mix_seed(1, 2) != pwl_mix_seed(1, 3));
}

TEST_CASE("weights through both backends") {
  for (pwl_backend backend : {PWL_BACKEND_TREE, PWL_BACKEND_FLAT}) {
    pwl_weights* w = nullptr;
    REQUIRE(ok(pwl_weights_create(0.0, 1.0, backend, &w)));
    REQUIRE(ok(pwl_weights_update(w, 0.0, 0.5, 0.5)));
    double total = 0.0;
    double left = 0.0;
    REQUIRE(ok(pwl_weights_total(w, &total)));
    REQUIRE(ok(pwl_weights_integrate(w, 0.0, 0.5, &left)));
    CHECK(left / total == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    size_t pieces = 0;
    REQUIRE(ok(pwl_weights_piece_count(w, &pieces)));
    CHECK(pieces == 2);
    CHECK(pwl_weights_update(w, 0.2, 0.1, 0.5) == PWL_ERR_OUT_OF_RANGE);
    CHECK(pwl_weights_update(w, 0.0, 0.1, -1.0) == PWL_ERR_INVALID_ARGUMENT);
    pwl_rng* rng = nullptr;
    REQUIRE(ok(pwl_rng_create(3, &rng)));
    int below = 0;
    for (int i = 0; i < 20000; ++i) {
      double x = 0.0;
      REQUIRE(ok(pwl_weights_draw(w, rng, &x)));
      below += x < 0.5;
    }
    CHECK(below / 20000.0 == doctest::Approx(1.0 / 3.0).epsilon(0.05));
    pwl_rng_destroy(rng);
    pwl_weights_destroy(w);
  }
}

TEST_CASE("continuous learner") {
  pwl_exp3* learner = nullptr;
  REQUIRE(ok(pwl_exp3_create(0.0, 1.0, std::log(2.0), PWL_BACKEND_TREE, &learner)));
  const pwl_interval half{0.0, 0.5, 1, 0};
  double p = 0.0;
  REQUIRE(ok(pwl_exp3_probability(learner, half, &p)));
  CHECK(p == doctest::Approx(0.5).epsilon(1e-15));
  double estimate = 0.0;
  REQUIRE(ok(pwl_exp3_observe(learner, 0.25, half, 0.5, &estimate)));
  CHECK(estimate == doctest::Approx(1.0).epsilon(1e-15));
  REQUIRE(ok(pwl_exp3_probability(learner, half, &p)));
  CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  double cumulative = 0.0;
  REQUIRE(ok(pwl_exp3_cumulative_loss(learner, &cumulative)));
  CHECK(cumulative == 0.5);
  CHECK(pwl_exp3_observe(learner, 0.75, half, 0.5, nullptr) == PWL_ERR_INVALID_ARGUMENT);
  CHECK(pwl_exp3_observe(learner, 0.25, half, 1.5, nullptr) == PWL_ERR_INVALID_ARGUMENT);
  pwl_rng* rng = nullptr;
  REQUIRE(ok(pwl_rng_create(9, &rng)));
  double rho = -1.0;
  REQUIRE(ok(pwl_exp3_sample(learner, rng, &rho)));
  CHECK(rho >= 0.0);
  CHECK(rho <= 1.0);
  pwl_rng_destroy(rng);
  pwl_exp3_destroy(learner);

  double lambda = 0.0;
  REQUIRE(ok(pwl_recommended_lambda(1, 0.5, 0.01, 1000, 10, &lambda)));
  CHECK(lambda > 0.0);
  CHECK(lambda <= 1.0);
  CHECK(pwl_recommended_lambda(1, 0.5, 0.01, 0, 10, &lambda) == PWL_ERR_INVALID_ARGUMENT);
}

TEST_CASE("net and discretized learner") {
  size_t count = 0;
  REQUIRE(ok(pwl_rnet(0.0, 1.0, 0.25, 1, nullptr, 0, &count)));
  REQUIRE(count == 2);
  std::vector<double> points(count);
  REQUIRE(ok(pwl_rnet(0.0, 1.0, 0.25, 1, points.data(), points.size(), &count)));
  CHECK(points == std::vector<double>{0.25, 0.75});
  CHECK(pwl_rnet(0.0, 1.0, 0.25, 1, points.data(), 1, &count) == PWL_ERR_OUT_OF_RANGE);
  CHECK(pwl_rnet(0.0, 1.0, 0.0, 1, nullptr, 0, &count) == PWL_ERR_INVALID_ARGUMENT);

  double r = 0.0;
  double lambda = 0.0;
  REQUIRE(ok(pwl_recommended_params(PWL_BANDIT, 1, 0.5, 1.0, 10000, 5, &r, &lambda)));
  CHECK(r > 0.0);
  CHECK(r <= 0.5);
  CHECK(lambda > 0.0);

  pwl_discrete_exp3* learner = nullptr;
  REQUIRE(ok(pwl_discrete_exp3_create(2, std::log(2.0), PWL_BACKEND_FLAT, &learner)));
  double p = 0.0;
  REQUIRE(ok(pwl_discrete_exp3_probability(learner, 0, &p)));
  CHECK(p == 0.5);
  const pwl_arm_range ranges[] = {{0, 1, 0.5}};
  double q = 0.0;
  REQUIRE(ok(pwl_discrete_exp3_observe(learner, ranges, 1, 0.5, &q)));
  CHECK(q == 0.5);
  REQUIRE(ok(pwl_discrete_exp3_probability(learner, 0, &p)));
  CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(pwl_discrete_exp3_probability(learner, 2, &p) == PWL_ERR_OUT_OF_RANGE);
  const pwl_arm_range empty[] = {{1, 1, 0.5}};
  CHECK(pwl_discrete_exp3_observe(learner, empty, 1, 0.5, &q) == PWL_ERR_OUT_OF_RANGE);
  pwl_rng* rng = nullptr;
  REQUIRE(ok(pwl_rng_create(4, &rng)));
  size_t arm = 9;
  REQUIRE(ok(pwl_discrete_exp3_sample(learner, rng, &arm)));
  CHECK(arm < 2);
  pwl_rng_destroy(rng);
  pwl_discrete_exp3_destroy(learner);
}

TEST_CASE("knapsack") {
  const double values[] = {0.3, 0.2, 0.1};
  const double sizes[] = {3.0, 2.0, 1.0};
  pwl_knapsack* inst = nullptr;
  REQUIRE(ok(pwl_knapsack_create(values, sizes, 3, 4.0, &inst)));
  CHECK(pwl_knapsack_size(inst) == 3);
  CHECK(pwl_knapsack_capacity(inst) == 4.0);
  pwl_knapsack_result result{};
  size_t selected[3] = {9, 9, 9};
  REQUIRE(ok(pwl_knapsack_greedy(inst, 0.0, 1.0, &result, selected, 3)));
  CHECK(result.selected_count == 2);
  CHECK(selected[0] == 0);
  CHECK(selected[1] == 2);
  CHECK(result.total_value == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(result.loss == doctest::Approx(3.6).epsilon(1e-15));
  CHECK(result.scaled_loss == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(result.feedback.lo == 0.0);
  CHECK(result.feedback.lo_closed == 1);
  CHECK(pwl_knapsack_greedy(inst, 2.0, 1.0, &result, nullptr, 0) == PWL_ERR_OUT_OF_RANGE);
  pwl_knapsack_destroy(inst);

  const double values2[] = {0.5, 0.3};
  const double sizes2[] = {2.0, 1.0};
  REQUIRE(ok(pwl_knapsack_create(values2, sizes2, 2, 2.0, &inst)));
  size_t count = 0;
  REQUIRE(ok(pwl_knapsack_critical_values(inst, 2.0, nullptr, 0, &count)));
  REQUIRE(count == 1);
  double critical = 0.0;
  REQUIRE(ok(pwl_knapsack_critical_values(inst, 2.0, &critical, 1, &count)));
  const double swap = std::log(0.5 / 0.3) / std::log(2.0);
  CHECK(critical == doctest::Approx(swap).epsilon(1e-14));
  pwl_interval searched{};
  size_t evals = 0;
  REQUIRE(ok(pwl_knapsack_search_feedback(inst, 0.1, 2.0, 1e-6, &searched, &evals)));
  CHECK(searched.lo <= 1e-6);
  CHECK(std::abs(searched.hi - swap) <= 1e-6);
  CHECK(evals > 0);
  pwl_knapsack_destroy(inst);

  const double bad_sizes[] = {0.0, 1.0};
  CHECK(pwl_knapsack_create(values2, bad_sizes, 2, 2.0, &inst) == PWL_ERR_INVALID_ARGUMENT);

  const std::string path = write_temp("inst.csv", "capacity,2\nv,s\n0.5,2\n0.3,1\n");
  REQUIRE(ok(pwl_knapsack_load(path.c_str(), &inst)));
  CHECK(pwl_knapsack_size(inst) == 2);
  pwl_knapsack_destroy(inst);
  std::remove(path.c_str());
  CHECK(pwl_knapsack_load("/nonexistent/inst.csv", &inst) == PWL_ERR_IO);
}

TEST_CASE("clustering") {
  // Two tight pairs far apart: every rho builds the same tree.
  const double entries[] = {0.0, 1.0, 3.0, 4.0,  //
                            1.0, 0.0, 4.0, 3.0,  //
                            3.0, 4.0, 0.0, 1.5,  //
                            4.0, 3.0, 1.5, 0.0};
  pwl_distances* d = nullptr;
  REQUIRE(ok(pwl_distances_create(entries, 4, 4.0, &d)));
  CHECK(pwl_distances_size(d) == 4);
  pwl_merge merges[3];
  pwl_interval feedback{};
  REQUIRE(ok(pwl_linkage(d, 0.5, merges, 3, &feedback)));
  CHECK(merges[0].left == 0);
  CHECK(merges[0].right == 1);
  CHECK(merges[1].left == 2);
  CHECK(merges[1].right == 3);
  CHECK(merges[2].left == 4);
  CHECK(merges[2].right == 5);
  CHECK(feedback.lo == 0.0);
  CHECK(feedback.hi == 1.0);
  CHECK(pwl_linkage(d, 0.5, merges, 2, &feedback) == PWL_ERR_OUT_OF_RANGE);
  size_t count = 0;
  REQUIRE(ok(pwl_linkage_cells(d, nullptr, 0, &count)));
  CHECK(count == 1);

  const int labels[] = {0, 0, 1, 1};
  double cost = -1.0;
  REQUIRE(ok(pwl_tree_cost(4, merges, labels, 2, &cost)));
  CHECK(cost == 0.0);
  CHECK(pwl_tree_cost(4, merges, labels, 5, &cost) == PWL_ERR_INVALID_ARGUMENT);
  pwl_distances_destroy(d);

  const double asymmetric[] = {0.0, 1.0, 2.0, 0.0};
  CHECK(pwl_distances_create(asymmetric, 2, 0.0, &d) == PWL_ERR_INVALID_ARGUMENT);

  const std::string matrix = write_temp("d.csv", "0,1,2\n1,0,3\n2,3,0\n");
  REQUIRE(ok(pwl_distances_load(matrix.c_str(), 0.0, &d)));
  CHECK(pwl_distances_size(d) == 3);
  REQUIRE(ok(pwl_linkage_cells(d, nullptr, 0, &count)));
  std::vector<pwl_interval> cells(count);
  REQUIRE(ok(pwl_linkage_cells(d, cells.data(), cells.size(), &count)));
  CHECK(cells.front().lo == 0.0);
  CHECK(cells.back().hi == 1.0);
  for (size_t i = 1; i < cells.size(); ++i) CHECK(cells[i].lo == cells[i - 1].hi);
  pwl_distances_destroy(d);
  std::remove(matrix.c_str());

  const std::string label_path = write_temp("labels.txt", "cat\ndog\ncat\n");
  int read[3] = {};
  REQUIRE(ok(pwl_labels_load(label_path.c_str(), read, 3, &count)));
  CHECK(count == 3);
  CHECK(read[0] == 0);
  CHECK(read[1] == 1);
  CHECK(read[2] == 0);
  CHECK(pwl_labels_load(label_path.c_str(), read, 2, &count) == PWL_ERR_OUT_OF_RANGE);
  std::remove(label_path.c_str());
}

TEST_CASE("output-only search with a callback") {
  int calls = 0;
  pwl_interval found{};
  size_t evals = 0;
  REQUIRE(ok(pwl_search_feedback(step_key, &calls, 0.5, 1e-6, 0.0, 1.0, &found, &evals)));
  CHECK(std::abs(found.lo - 0.3) <= 1e-6);
  CHECK(std::abs(found.hi - 0.7) <= 1e-6);
  CHECK(found.lo <= 0.5);
  CHECK(found.hi >= 0.5);
  CHECK(static_cast<size_t>(calls) == evals);
  CHECK(pwl_search_feedback(failing_key, nullptr, 0.5, 1e-6, 0.0, 1.0, &found, &evals) !=
        PWL_OK);
  CHECK(pwl_search_feedback(step_key, &calls, 1.5, 1e-6, 0.0, 1.0, &found, &evals) ==
        PWL_ERR_OUT_OF_RANGE);
}

TEST_CASE("dispersion") {
  const double locations[] = {0.1, 0.5, 0.12, 0.9};
  const size_t offsets[] = {0, 2, 4};
  size_t worst = 0;
  REQUIRE(ok(pwl_worst_ball_count(locations, offsets, 2, 0.05, &worst)));
  CHECK(worst == 2);
  REQUIRE(ok(pwl_worst_ball_count(locations, offsets, 2, 0.001, &worst)));
  CHECK(worst == 1);
  const size_t descending[] = {2, 0};
  CHECK(pwl_worst_ball_count(locations, descending, 1, 0.1, &worst) == PWL_ERR_INVALID_ARGUMENT);

  double bound = 0.0;
  REQUIRE(ok(pwl_knapsack_bound(1000, 0.01, 10, 2.0, 5.0, 0.0, &bound)));
  CHECK(bound > 0.0);
  double statement = 0.0;
  double proof = 0.0;
  REQUIRE(ok(pwl_clustering_bound(1000, 0.01, 10, 2.0, 3.0, 3.0, 0.0, 8192, &statement, &proof)));
  CHECK(statement > 0.0);
  CHECK(proof > 0.0);

  size_t count = 0;
  REQUIRE(ok(pwl_validate_density_transforms(1.0, 3.0, 3.0, 100000, 7, nullptr, 0, &count)));
  REQUIRE(count > 0);
  std::vector<pwl_density_check> checks(count);
  REQUIRE(ok(pwl_validate_density_transforms(1.0, 3.0, 3.0, 100000, 7, checks.data(),
                                             checks.size(), &count)));
  for (const auto& c : checks) {
    CHECK(std::strlen(c.name) > 0);
    CHECK(c.pass == 1);
    CHECK(c.max_density <= c.allowed);
  }
}

TEST_CASE("configs and runs") {
  pwl_config* cfg = nullptr;
  CHECK(pwl_config_parse("T = [10,\n", "exp.toml", &cfg) == PWL_ERR_PARSE);
  CHECK(contains(pwl_last_error(), "exp.toml:"));
  CHECK(pwl_config_parse("env = \"maze\"\n", "exp.toml", &cfg) == PWL_ERR_PARSE);
  CHECK(cfg == nullptr);
  CHECK(pwl_config_load("/nonexistent/exp.toml", &cfg) == PWL_ERR_IO);

  REQUIRE(ok(pwl_config_parse("env = \"knapsack\"\nT = [50]\nseeds = [1, 2]\ntiming = false\n"
                              "[knapsack]\nn = 4\n",
                              "exp.toml", &cfg)));
  REQUIRE(ok(pwl_config_validate(cfg)));
  char* csv = nullptr;
  char* trace = nullptr;
  REQUIRE(ok(pwl_experiment_run(cfg, &csv, &trace)));
  const std::string table = take(csv);
  const std::string rounds = take(trace);
  CHECK(contains(table, "seed,T,learner_loss,opt_loss,regret,us_per_round\n"));
  CHECK(contains(table, "\n1,50,"));
  CHECK(contains(table, "\n2,50,"));
  CHECK_FALSE(rounds.empty());

  CHECK(pwl_config_set(cfg, "colour", "red") == PWL_ERR_PARSE);
  CHECK(pwl_config_set(cfg, "knapsack.n", "0") == PWL_ERR_PARSE);
  REQUIRE(ok(pwl_config_set(cfg, "dispersion.eps_count", "3")));
  REQUIRE(ok(pwl_config_set(cfg, "dispersion.T", "20")));
  REQUIRE(ok(pwl_dispersion_run(cfg, &csv)));
  const std::string dispersion = take(csv);
  CHECK(contains(dispersion, "fitted_additive_constant="));
  pwl_config_destroy(cfg);

  REQUIRE(ok(pwl_config_create(&cfg)));
  REQUIRE(ok(pwl_config_validate(cfg)));
  REQUIRE(ok(pwl_config_set(cfg, "env", "synthetic")));
  CHECK(pwl_dispersion_run(cfg, &csv) == PWL_ERR_PARSE);
  pwl_config_destroy(cfg);
}
