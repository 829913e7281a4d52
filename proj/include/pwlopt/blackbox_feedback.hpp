// Copyright 2026 The pwlopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>

#include "pwlopt/param_core.hpp"

namespace pwlopt {

template <class Output>
struct SearchFeedback {
  Output output;
  ParamInterval interval;  // closed; output is constant on it
  std::size_t evaluations = 0;
};

/// Semi-bandit feedback for a single-parameter piecewise-unique algorithm,
/// given as a callable rho -> output with operator==. Two bisections locate
/// the ends of the constant piece containing rho: every point of the returned
/// interval yields the same output, and no point more than eps outside it
/// does. Each bisection halves its bracket until it is at most eps wide, so
/// there are at most 2 * ceil(log2(width / eps)) + 1 evaluations.
template <class Algorithm>
auto binary_search_feedback(Algorithm&& algorithm, double rho, double eps,
                            const ParamSpace1D& space = ParamSpace1D(0.0, 1.0))
    -> SearchFeedback<std::decay_t<std::invoke_result_t<Algorithm&, double>>> {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw std::invalid_argument("search accuracy eps must be positive, got " + std::to_string(eps));
  }
  if (!space.contains(rho)) throw std::out_of_range("rho outside the parameter space");

  SearchFeedback<std::decay_t<std::invoke_result_t<Algorithm&, double>>> out{
      algorithm(rho), ParamInterval::closed(rho, rho), 1};

  // Lower end: invariant output(b) == y, and output(a) != y unless a is the space start.
  double a = space.lo();
  double b = rho;
  while (b - a > eps) {
    const double mid = 0.5 * (a + b);
    ++out.evaluations;
    if (algorithm(mid) == out.output) {
      b = mid;
    } else {
      a = mid;
    }
  }
  // Upper end: output(c) == y, and output(d) != y unless d is the space end.
  double c = rho;
  double d = space.hi();
  while (d - c > eps) {
    const double mid = 0.5 * (c + d);
    ++out.evaluations;
    if (algorithm(mid) == out.output) {
      c = mid;
    } else {
      d = mid;
    }
  }
  out.interval = ParamInterval::closed(b, c);
  return out;
}

/// Exact variant for parameters carried with `bits` fractional bits on
/// [0, 1]. Both bisections run on the integer grid k * 2^-bits, so each takes
/// at most `bits` halvings and the returned ends are the extreme grid points
/// of the piece. rho itself must be a grid point.
template <class Algorithm>
auto binary_search_feedback_bits(Algorithm&& algorithm, double rho, unsigned bits)
    -> SearchFeedback<std::decay_t<std::invoke_result_t<Algorithm&, double>>> {
  if (bits == 0 || bits > 52) throw std::invalid_argument("bits must lie in [1, 52]");
  const double steps = std::ldexp(1.0, static_cast<int>(bits));
  const double scaled = rho * steps;
  if (!(rho >= 0.0 && rho <= 1.0) || scaled != std::floor(scaled)) {
    throw std::invalid_argument("rho is not a point of the 2^-bits grid on [0, 1]");
  }
  const auto at = [&](long long k) { return algorithm(static_cast<double>(k) / steps); };
  const auto top = static_cast<long long>(steps);
  const auto start = static_cast<long long>(scaled);

  SearchFeedback<std::decay_t<std::invoke_result_t<Algorithm&, double>>> out{
      at(start), ParamInterval::closed(rho, rho), 1};
  long long a = 0;
  long long b = start;
  if (b > 0) {
    ++out.evaluations;
    if (at(0) == out.output) b = 0;
  }
  while (b - a > 1) {
    const long long mid = a + (b - a) / 2;
    ++out.evaluations;
    if (at(mid) == out.output) {
      b = mid;
    } else {
      a = mid;
    }
  }
  long long c = start;
  long long d = top;
  if (c < d) {
    ++out.evaluations;
    if (at(top) == out.output) c = top;
  }
  while (d - c > 1) {
    const long long mid = c + (d - c) / 2;
    ++out.evaluations;
    if (at(mid) == out.output) {
      c = mid;
    } else {
      d = mid;
    }
  }
  out.interval = ParamInterval::closed(static_cast<double>(b) / steps, static_cast<double>(c) / steps);
  return out;
}

}  // namespace pwlopt
