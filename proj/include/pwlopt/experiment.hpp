// Copyright 2026 The pwlopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pwlopt/clustering.hpp"
#include "pwlopt/dispersion.hpp"
#include "pwlopt/exp3_discretized.hpp"
#include "pwlopt/knapsack.hpp"
#include "pwlopt/param_core.hpp"
#include "pwlopt/synthetic.hpp"

namespace pwlopt {

enum class EnvKind { knapsack, clustering, synthetic };
enum class LearnerKind { continuous, discretized };

const char* to_string(EnvKind kind) noexcept;
const char* to_string(LearnerKind kind) noexcept;

struct DispersionSettings {
  std::size_t horizon = 1000;
  double eps_min = 1e-4;
  double eps_max = 1e-1;
  std::size_t eps_count = 7;
  double additive_constant = 2.0;
};

struct ExperimentConfig {
  EnvKind env = EnvKind::knapsack;
  LearnerKind learner = LearnerKind::continuous;
  Regime regime = Regime::semi_bandit;
  std::vector<std::size_t> horizons{1000};
  std::vector<std::uint64_t> seeds{1};
  std::uint64_t master_seed = 0;
  std::optional<double> lambda;
  std::optional<double> r;
  double lipschitz = 1.0;
  bool timing = true;
  std::size_t threads = 0;  // 0: one per hardware thread
  knapsack::Environment::Options knapsack;
  clustering::Environment::Options clustering;
  SyntheticEnvironment::Options synthetic;
  DispersionSettings dispersion;
};

/// Bad configuration. `where()` names the source position or flag.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& where, const std::string& message)
      : std::invalid_argument(where.empty() ? message : where + ": " + message), where_(where) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

/// TOML text to a validated config. Keys are the same dotted names accepted
/// by `apply_setting` ("env", "T", "knapsack.n", ...).
ExperimentConfig parse_config(std::string_view toml, std::string_view source = "config");
ExperimentConfig load_config(const std::string& path);

/// One key = value override. Lists are comma separated.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Throws ConfigError when the config cannot be run.
void validate(const ExperimentConfig& config);

std::unique_ptr<SemiBanditEnvironment> make_environment(const ExperimentConfig& config,
                                                        std::uint64_t seed);

struct HindsightOptimum {
  double rho = 0.0;
  double total_loss = 0.0;
  bool grid_fallback = false;
};

/// Exact minimiser of the summed piecewise-constant losses: merges every
/// round's boundaries and sweeps the merged cells left to right.
class HindsightAccumulator {
 public:
  explicit HindsightAccumulator(const ParamSpace1D& space) : space_(space) {}
  void add(const Partition& cells);
  std::size_t rounds() const noexcept { return rounds_; }
  HindsightOptimum best() const;

 private:
  ParamSpace1D space_;
  std::vector<std::pair<double, double>> events_;
  double base_ = 0.0;
  std::size_t rounds_ = 0;
};

HindsightOptimum best_in_hindsight(std::span<const Partition> rounds, const ParamSpace1D& space);

/// Minimum over an evenly spaced grid of parameters, evaluating the
/// environment directly. For environments without cell boundaries.
HindsightOptimum grid_best_in_hindsight(SemiBanditEnvironment& env, std::size_t horizon,
                                        std::size_t points = 100000);

struct RegretRecord {
  std::uint64_t seed = 0;
  std::size_t horizon = 0;
  double learner_loss = 0.0;
  double opt_loss = 0.0;
  double regret = 0.0;
  double us_per_round = 0.0;
};

struct ExperimentResult {
  std::vector<std::string> notes;  // written as '#' lines above the header
  std::vector<RegretRecord> records;
  std::string trace;  // per-round CSV, filled when requested
};

/// Losses in every record are in [0, 1] units (raw loss / loss bound).
ExperimentResult run_experiment(const ExperimentConfig& config, bool with_trace = false);

std::string to_csv(const ExperimentResult& result);

struct DispersionResult {
  std::vector<std::string> notes;
  std::vector<dispersion::DispersionRow> rows;
  double fitted_constant = 0.0;
};

/// Worst-ball counts of the configured environment, averaged over seeds,
/// next to the dispersion bound at `dispersion.additive_constant`.
DispersionResult run_dispersion(const ExperimentConfig& config);

std::string to_csv(const DispersionResult& result);

}  // namespace pwlopt
