// Copyright 2026 The pwlopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "pwlopt/exp3_discretized.hpp"

#include <algorithm>

namespace pwlopt {

const char* to_string(Regime regime) noexcept {
  switch (regime) {
    case Regime::full_info: return "full_info";
    case Regime::semi_bandit: return "semi_bandit";
    case Regime::bandit: return "bandit";
  }
  return "unknown";
}

Regime parse_regime(const std::string& name) {
  if (name == "full_info") return Regime::full_info;
  if (name == "semi_bandit") return Regime::semi_bandit;
  if (name == "bandit") return Regime::bandit;
  throw std::invalid_argument("unknown regime '" + name +
                              "' (expected full_info, semi_bandit or bandit)");
}

RNet build_rnet(const ParamSpace1D& space, double r, int dim) {
  if (dim < 1) throw std::invalid_argument("net dimension must be >= 1");
  // r = R is allowed: the centre alone covers the space.
  if (!(r > 0.0) || !(r <= space.radius())) {
    throw std::invalid_argument("net radius must satisfy 0 < r <= R = " +
                                std::to_string(space.radius()));
  }
  RNet net{dim, r, space.lo(), space.hi(), {}};
  if (dim == 1) {
    for (double start = space.lo(); start < space.hi(); start += 2.0 * r) {
      net.coords.push_back(std::min(start + r, space.hi()));
    }
    return net;
  }
  // Grid cells of side s have half-diagonal (s / 2) sqrt(d) = r.
  const double spacing = 2.0 * r / std::sqrt(static_cast<double>(dim));
  const auto per_axis = static_cast<std::size_t>(std::ceil(space.width() / spacing));
  std::vector<double> axis(per_axis);
  for (std::size_t k = 0; k < per_axis; ++k) {
    axis[k] = std::min(space.lo() + (static_cast<double>(k) + 0.5) * spacing, space.hi());
  }
  std::vector<std::size_t> digit(static_cast<std::size_t>(dim), 0);
  for (;;) {
    for (std::size_t j = 0; j < digit.size(); ++j) net.coords.push_back(axis[digit[j]]);
    std::size_t j = 0;
    while (j < digit.size() && ++digit[j] == per_axis) digit[j++] = 0;
    if (j == digit.size()) break;
  }
  return net;
}

ArmRange arms_in(const RNet& net, const ParamInterval& set, double loss) {
  if (net.dim != 1) throw std::invalid_argument("arm ranges are defined for 1-D nets only");
  const auto begin = net.coords.begin();
  auto first = std::lower_bound(begin, net.coords.end(), set.lo);
  if (!set.lo_closed) first = std::upper_bound(begin, net.coords.end(), set.lo);
  auto last = set.hi_closed ? std::upper_bound(begin, net.coords.end(), set.hi)
                            : std::lower_bound(begin, net.coords.end(), set.hi);
  return ArmRange{static_cast<std::size_t>(first - begin), static_cast<std::size_t>(last - begin),
                  loss};
}

DiscretizedParams recommended_params(Regime regime, int dim, double radius, double lipschitz,
                                     long long horizon, long long cells) {
  if (horizon < 1 || dim < 1 || cells < 1) throw std::invalid_argument("need T, d, M >= 1");
  if (!(lipschitz > 0.0) || !(radius > 0.0)) throw std::invalid_argument("need L > 0 and R > 0");
  const double t = static_cast<double>(horizon);
  const double d = static_cast<double>(dim);
  const auto finish = [](double r, double log_term, double denom) {
    const double lambda = log_term > 0.0 ? std::min(1.0, std::sqrt(log_term / denom)) : 1.0;
    return DiscretizedParams{r, lambda > 0.0 ? lambda : 1.0};
  };
  switch (regime) {
    case Regime::full_info:
      return finish(1.0 / (lipschitz * std::sqrt(t)), std::log(radius * lipschitz * std::sqrt(t)),
                    t);
    case Regime::semi_bandit:
      return finish(1.0 / (lipschitz * std::sqrt(t)),
                    d * std::log(radius * lipschitz * std::sqrt(t)),
                    static_cast<double>(cells) * t);
    case Regime::bandit: {
      const double r = std::pow(t, -1.0 / (d + 2.0));
      const double log_term = d * std::log(3.0 * radius * std::pow(t, 1.0 / (d + 2.0)));
      const double denom = std::pow(3.0 * radius, d) * std::pow(t, 2.0 * (d + 1.0) / (d + 2.0));
      return finish(r, log_term, denom);
    }
  }
  throw std::invalid_argument("unknown regime");
}

}  // namespace pwlopt
