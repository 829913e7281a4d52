// Copyright 2026 The pwlopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pwlopt/param_core.hpp"
#include "pwlopt/rng.hpp"

namespace pwlopt::dispersion {

/// Discontinuity locations of each round's loss, sorted ascending.
struct DiscontinuityProfile {
  std::vector<std::vector<double>> rounds;

  std::size_t max_per_round() const noexcept;
};

/// max over rho of the number of distinct rounds with a discontinuity in
/// [rho - eps, rho + eps]. Exact sweep over the sorted union of locations.
std::size_t worst_ball_count(const DiscontinuityProfile& profile, double eps);

/// T eps n^2 kappa^2 ln(C) + c sqrt(T ln(T n)).
double knapsack_bound(double horizon, double eps, double items, double kappa, double capacity,
                      double additive_constant = 1.0);

/// The two readings of the clustering dispersion function, side by side:
///   statement: 32 T eps n^8 kappa^2 M^2 + c sqrt(T ln(T n))
///   proof:     proof_constant T eps (kappa B)^2 n^8 + c sqrt(T ln(T n))
/// They coincide when M = B and proof_constant = 32.
struct ClusteringBound {
  double statement = 0.0;
  double proof = 0.0;
};
ClusteringBound clustering_bound(double horizon, double eps, double points, double kappa,
                                 double bound_b, double bound_m, double additive_constant = 1.0,
                                 double proof_constant = 32.0);

struct DensityCheck {
  std::string name;
  double max_density = 0.0;  // largest histogram bin density
  double bound = 0.0;
  double allowed = 0.0;      // bound * (1 + 3 / sqrt(count in that bin))
  bool pass = false;
};

/// Monte Carlo checks of the bounded-density transformation lemmas, each on
/// variables that are uniform on sub-intervals of width 1/kappa:
///   sum       X + Y                      <= kappa
///   ratio     X / Y, |Y| <= M            <= (joint bound) M^2
///   share     X / (X + Y), |X|,|Y| <= M  <= 4 kappa^2 M^2
///   shifted   (X + Y) / (Z + Y), |Y|,|Z| <= M  <= 4 kappa^2 M^2
/// Unconstrained variables live on [0, B], bounded ones on [0, M].
std::vector<DensityCheck> validate_density_transforms(double kappa, double bound_m,
                                                      double bound_b, std::size_t samples,
                                                      Rng& rng);

/// Interior cell boundaries of the first `horizon` rounds' feedback systems.
DiscontinuityProfile collect_discontinuities(SemiBanditEnvironment& env, std::size_t horizon);

struct DispersionRow {
  double epsilon = 0.0;
  double empirical_mean = 0.0;
  double empirical_stderr = 0.0;
  double bound_statement = 0.0;
  double bound_proof = 0.0;
};

/// Seed-averaged worst-ball counts on one profile per seed.
struct SeedAverage {
  double mean = 0.0;
  double stderr_of_mean = 0.0;
};
SeedAverage seed_average(const std::vector<DiscontinuityProfile>& profiles, double eps);

std::vector<double> log_spaced(double lo, double hi, std::size_t count);

std::string to_csv(const std::vector<DispersionRow>& rows);

/// Smallest c with mean <= leading(eps) + c sqrt(T ln(T n)) on every row,
/// where leading is the bound minus its additive term (computed with c = 0).
double fitted_additive_constant(const std::vector<DispersionRow>& rows_without_additive,
                                double horizon, double items);

}  // namespace pwlopt::dispersion
