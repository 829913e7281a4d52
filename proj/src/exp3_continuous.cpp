// Copyright 2026 The pwlopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "pwlopt/exp3_continuous.hpp"

#include <algorithm>

namespace pwlopt {

double recommended_lambda(int dim, double radius, double r, long long horizon, long long cells) {
  if (dim < 1 || horizon < 1 || cells < 1) {
    throw std::invalid_argument("recommended_lambda needs d, T, M >= 1");
  }
  if (!(r > 0.0) || !(radius > r)) throw std::invalid_argument("recommended_lambda needs R > r > 0");
  const double lambda = std::sqrt(dim * std::log(radius / r) /
                                  (static_cast<double>(horizon) * static_cast<double>(cells)));
  return std::min(1.0, lambda);
}

}  // namespace pwlopt
