// Copyright 2026 The pwlopt Authors
// SPDX-License-Identifier: Apache-2.0

// Small helpers shared by the test binaries.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "pwlopt/param_core.hpp"
#include "pwlopt/rng.hpp"

namespace pwltest {

inline double rel_err(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

// Kolmogorov distance between the empirical CDF of xs and cdf.
template <class Cdf>
double ks_distance(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, std::abs(f - i / n), std::abs(f - (i + 1) / n)});
  }
  return d;
}

// Random ordered pair in [lo, hi].
inline std::pair<double, double> random_range(pwlopt::Rng& rng, double lo, double hi) {
  double a = rng.uniform(lo, hi);
  double b = rng.uniform(lo, hi);
  if (a > b) std::swap(a, b);
  return {a, b};
}

// Partition of `space` into `cells` pieces with random cut points and losses.
inline pwlopt::Partition random_partition(pwlopt::Rng& rng, const pwlopt::ParamSpace1D& space,
                                          std::size_t cells) {
  std::vector<double> cuts{space.lo(), space.hi()};
  for (std::size_t i = 1; i < cells; ++i) cuts.push_back(rng.uniform(space.lo(), space.hi()));
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  pwlopt::Partition out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    out.push_back({space.cell(cuts[i], cuts[i + 1]), rng.uniform()});
  }
  return out;
}

// The cell of `partition` containing x.
inline const pwlopt::Cell& cell_at(const pwlopt::Partition& partition, double x) {
  for (const pwlopt::Cell& c : partition) {
    if (c.set.contains(x)) return c;
  }
  return partition.back();
}

}  // namespace pwltest
