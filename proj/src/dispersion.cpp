// Copyright 2026 The pwlopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "pwlopt/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace pwlopt::dispersion {

std::size_t DiscontinuityProfile::max_per_round() const noexcept {
  std::size_t k = 0;
  for (const auto& r : rounds) k = std::max(k, r.size());
  return k;
}

std::size_t worst_ball_count(const DiscontinuityProfile& profile, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("ball radius must be positive");
  std::vector<std::pair<double, std::size_t>> events;
  for (std::size_t t = 0; t < profile.rounds.size(); ++t) {
    for (double x : profile.rounds[t]) events.emplace_back(x, t);
  }
  std::sort(events.begin(), events.end());

  // A best ball can always be slid right until its left end meets a point.
  std::vector<std::size_t> hits(profile.rounds.size(), 0);
  std::size_t distinct = 0;
  std::size_t best = 0;
  std::size_t right = 0;
  for (std::size_t left = 0; left < events.size(); ++left) {
    const double reach = events[left].first + 2.0 * eps;
    while (right < events.size() && events[right].first <= reach) {
      if (hits[events[right].second]++ == 0) ++distinct;
      ++right;
    }
    best = std::max(best, distinct);
    if (--hits[events[left].second] == 0) --distinct;
  }
  return best;
}

namespace {

double additive_term(double horizon, double items, double c) {
  if (c == 0.0 || horizon <= 0.0) return 0.0;
  return c * std::sqrt(horizon * std::log(horizon * items));
}

}  // namespace

double knapsack_bound(double horizon, double eps, double items, double kappa, double capacity,
                      double additive_constant) {
  return horizon * eps * items * items * kappa * kappa * std::log(capacity) +
         additive_term(horizon, items, additive_constant);
}

ClusteringBound clustering_bound(double horizon, double eps, double points, double kappa,
                                 double bound_b, double bound_m, double additive_constant,
                                 double proof_constant) {
  const double n8 = std::pow(points, 8.0);
  const double extra = additive_term(horizon, points, additive_constant);
  return ClusteringBound{
      32.0 * horizon * eps * n8 * kappa * kappa * bound_m * bound_m + extra,
      proof_constant * horizon * eps * (kappa * bound_b) * (kappa * bound_b) * n8 + extra};
}

namespace {

// Uniform on [start, start + 1/kappa] for a start fixed once per variable.
struct BoundedVariable {
  double start;
  double width;
  double operator()(Rng& rng) const { return start + width * rng.uniform(); }
};

BoundedVariable make_variable(double kappa, double support, Rng& rng) {
  const double width = 1.0 / kappa;
  return BoundedVariable{rng.uniform(0.0, support - width), width};
}

DensityCheck histogram_check(std::string name, std::vector<double> values, double bound) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  const double lo = values.front();
  // Ratios are heavy-tailed; the histogram spans up to the 99th percentile.
  const double hi = values[std::min(n - 1, static_cast<std::size_t>(0.99 * static_cast<double>(n)))];
  constexpr std::size_t kBins = 200;
  const double width = (hi - lo) / kBins;
  std::vector<std::size_t> counts(kBins, 0);
  for (double v : values) {
    if (v > hi) break;
    auto bin = static_cast<std::size_t>((v - lo) / width);
    counts[std::min(bin, kBins - 1)]++;
  }
  const auto peak = std::max_element(counts.begin(), counts.end());
  DensityCheck check;
  check.name = std::move(name);
  check.max_density = static_cast<double>(*peak) / (static_cast<double>(n) * width);
  check.bound = bound;
  check.allowed = bound * (1.0 + 3.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(*peak, 1))));
  check.pass = check.max_density <= check.allowed;
  return check;
}

}  // namespace

std::vector<DensityCheck> validate_density_transforms(double kappa, double bound_m,
                                                      double bound_b, std::size_t samples,
                                                      Rng& rng) {
  if (!std::isfinite(kappa) || !(kappa > 0.0)) throw std::invalid_argument("kappa must be finite and positive");
  if (!(bound_m > 0.0) || !(bound_b > 0.0)) throw std::invalid_argument("M and B must be positive");
  if (1.0 / kappa > std::min(bound_m, bound_b)) {
    throw std::invalid_argument("no density bounded by kappa fits on [0, min(M, B)]");
  }
  if (samples < 100000) throw std::invalid_argument("need at least 1e5 samples");

  std::vector<DensityCheck> report;
  std::vector<double> values(samples);
  const auto run = [&](std::string name, double bound, auto&& draw) {
    for (double& v : values) v = draw();
    report.push_back(histogram_check(std::move(name), values, bound));
  };

  {
    const auto x = make_variable(kappa, bound_b, rng);
    const auto y = make_variable(kappa, bound_b, rng);
    run("sum", kappa, [&] { return x(rng) + y(rng); });
  }
  {
    const auto x = make_variable(kappa, bound_b, rng);
    const auto y = make_variable(kappa, bound_m, rng);
    // X and Y independent, so their joint density is bounded by kappa^2.
    run("ratio", kappa * kappa * bound_m * bound_m, [&] { return x(rng) / y(rng); });
  }
  {
    const auto x = make_variable(kappa, bound_m, rng);
    const auto y = make_variable(kappa, bound_m, rng);
    run("share", 4.0 * kappa * kappa * bound_m * bound_m, [&] {
      const double a = x(rng);
      return a / (a + y(rng));
    });
  }
  {
    const auto x = make_variable(kappa, bound_b, rng);
    const auto y = make_variable(kappa, bound_m, rng);
    const auto z = make_variable(kappa, bound_m, rng);
    run("shifted_ratio", 4.0 * kappa * kappa * bound_m * bound_m, [&] {
      const double a = x(rng);
      const double b = y(rng);
      return (a + b) / (z(rng) + b);
    });
  }
  return report;
}

DiscontinuityProfile collect_discontinuities(SemiBanditEnvironment& env, std::size_t horizon) {
  DiscontinuityProfile profile;
  profile.rounds.reserve(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    const auto cells = env.partition(t);
    if (!cells) throw std::invalid_argument("environment does not expose its cell boundaries");
    std::vector<double> cuts;
    for (std::size_t k = 1; k < cells->size(); ++k) cuts.push_back((*cells)[k].set.lo);
    profile.rounds.push_back(std::move(cuts));
  }
  return profile;
}

SeedAverage seed_average(const std::vector<DiscontinuityProfile>& profiles, double eps) {
  if (profiles.empty()) return {};
  std::vector<double> counts;
  for (const auto& p : profiles) counts.push_back(static_cast<double>(worst_ball_count(p, eps)));
  const double n = static_cast<double>(counts.size());
  double mean = 0.0;
  for (double c : counts) mean += c;
  mean /= n;
  double var = 0.0;
  for (double c : counts) var += (c - mean) * (c - mean);
  var = counts.size() > 1 ? var / (n - 1.0) : 0.0;
  return SeedAverage{mean, std::sqrt(var / n)};
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi >= lo) || count == 0) throw std::invalid_argument("bad log grid");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    out[i] = std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)));
  }
  return out;
}

std::string to_csv(const std::vector<DispersionRow>& rows) {
  std::ostringstream out;
  out.precision(10);
  out << "epsilon,empirical_mean,empirical_stderr,bound_statement,bound_proof\n";
  for (const auto& r : rows) {
    out << r.epsilon << ',' << r.empirical_mean << ',' << r.empirical_stderr << ','
        << r.bound_statement << ',' << r.bound_proof << '\n';
  }
  return out.str();
}

double fitted_additive_constant(const std::vector<DispersionRow>& rows_without_additive,
                                double horizon, double items) {
  const double unit = additive_term(horizon, items, 1.0);
  double c = 0.0;
  for (const auto& r : rows_without_additive) {
    c = std::max(c, (r.empirical_mean - r.bound_statement) / unit);
  }
  return c;
}

}  // namespace pwlopt::dispersion
