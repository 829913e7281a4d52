// Copyright 2026 The pwlopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pwlopt/param_core.hpp"
#include "pwlopt/rng.hpp"
#include "pwlopt/weight_tree.hpp"

namespace pwlopt {

enum class Regime { full_info, semi_bandit, bandit };

const char* to_string(Regime regime) noexcept;
Regime parse_regime(const std::string& name);

/// Finite cover of the box [lo, hi]^dim: every point of the box lies within
/// distance r of some net point.
struct RNet {
  int dim = 1;
  double r = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> coords;  // row-major, dim values per point

  std::size_t size() const noexcept { return coords.size() / static_cast<std::size_t>(dim); }
  std::span<const double> point(std::size_t i) const {
    return {coords.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  double point1d(std::size_t i) const { return coords[i]; }
};

/// d = 1: points lo + r, lo + 3r, ... (last one clipped to hi).
/// d >= 2: axis-aligned grid with spacing 2r / sqrt(d).
RNet build_rnet(const ParamSpace1D& space, double r, int dim = 1);

/// For a 1-D net, the contiguous range [first, last) of net points inside `set`.
struct ArmRange {
  std::size_t first = 0;
  std::size_t last = 0;
  double loss = 0.0;
};
ArmRange arms_in(const RNet& net, const ParamInterval& set, double loss);

struct DiscretizedParams {
  double r = 0.0;
  double lambda = 0.0;
};

/// Granularity and step size for each feedback regime. `cells` is the number
/// of feedback sets per round (semi-bandit only).
DiscretizedParams recommended_params(Regime regime, int dim, double radius, double lipschitz,
                                     long long horizon, long long cells = 1);

/// Exp3-SET over N arms. Arm i owns the bin [i, i + 1) of a weight function
/// on [0, N), so sampling and range updates cost O(log N) with the tree
/// backend; FlatWeights gives the linear-scan variant.
template <class Weights>
class DiscreteExp3Set {
 public:
  DiscreteExp3Set(std::size_t arms, double lambda)
      : weights_(ParamInterval::half_open(0.0, static_cast<double>(arms))),
        arms_(arms),
        lambda_(lambda) {
    if (arms == 0) throw std::invalid_argument("need at least one arm");
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
      throw std::invalid_argument("step size must lie in [0, 1], got " + std::to_string(lambda));
    }
  }

  std::size_t sample(Rng& rng) const {
    const Piece piece = weights_.sample_piece(rng.uniform());
    const auto first = static_cast<std::size_t>(piece.lo);
    const auto count = static_cast<std::size_t>(piece.hi) - first;
    const auto offset = static_cast<std::size_t>(rng.uniform() * static_cast<double>(count));
    return first + (offset < count ? offset : count - 1);
  }

  double probability(std::size_t arm) const {
    return weights_.integrate(static_cast<double>(arm), static_cast<double>(arm + 1)) /
           weights_.total();
  }

  double probability(std::size_t first, std::size_t last) const {
    return weights_.integrate(static_cast<double>(first), static_cast<double>(last)) /
           weights_.total();
  }

  std::vector<double> probabilities() const {
    std::vector<double> p(arms_);
    const double total = weights_.total();
    for (std::size_t i = 0; i < arms_; ++i) {
      p[i] = weights_.integrate(static_cast<double>(i), static_cast<double>(i + 1)) / total;
    }
    return p;
  }

  /// One Exp3-SET update from the observed arms. q is the total probability
  /// of the observed ranges; each observed arm's estimate is loss / q.
  /// Returns q.
  double observe(std::span<const ArmRange> observed, double loss_at_play) {
    double q = 0.0;
    for (const ArmRange& range : observed) {
      if (range.first >= range.last || range.last > arms_) {
        throw std::out_of_range("observed arm range is empty or out of bounds");
      }
      if (!(range.loss >= 0.0 && range.loss <= 1.0)) {
        throw std::invalid_argument("arm loss outside [0, 1]");
      }
      q += probability(range.first, range.last);
    }
    if (!(q > 0.0)) throw std::domain_error("observed arms carry zero probability");
    for (const ArmRange& range : observed) {
      if (range.loss > 0.0) {
        weights_.update(static_cast<double>(range.first), static_cast<double>(range.last),
                        decay_factor(lambda_ * range.loss / q));
      }
    }
    ++round_;
    cumulative_loss_ += loss_at_play;
    return q;
  }

  double observe_arm(std::size_t arm, double loss) {
    const ArmRange range{arm, arm + 1, loss};
    return observe(std::span<const ArmRange>(&range, 1), loss);
  }

  std::size_t arms() const noexcept { return arms_; }
  double lambda() const noexcept { return lambda_; }
  std::size_t round() const noexcept { return round_; }
  double cumulative_loss() const noexcept { return cumulative_loss_; }
  const Weights& weights() const noexcept { return weights_; }

 private:
  Weights weights_;
  std::size_t arms_;
  double lambda_;
  std::size_t round_ = 0;
  double cumulative_loss_ = 0.0;
};

using TreeDiscreteExp3Set = DiscreteExp3Set<WeightTree>;
using LinearDiscreteExp3Set = DiscreteExp3Set<FlatWeights>;

}  // namespace pwlopt
