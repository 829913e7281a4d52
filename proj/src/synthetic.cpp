// Copyright 2026 The pwlopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "pwlopt/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "pwlopt/rng.hpp"

namespace pwlopt {

SyntheticEnvironment::SyntheticEnvironment(Options options, std::uint64_t seed)
    : options_(options), space_(options.lo, options.hi), seed_(seed) {
  if (options.cells == 0) throw std::invalid_argument("synthetic environment needs >= 1 cell");
  if (options.constant_loss && !(*options.constant_loss >= 0.0 && *options.constant_loss <= 1.0)) {
    throw std::invalid_argument("constant loss must lie in [0, 1]");
  }
  Rng rng(mix_seed(seed, ~std::uint64_t{0}));
  target_ = rng.uniform(space_.lo(), space_.hi());
}

const Partition& SyntheticEnvironment::cells(std::size_t round) {
  if (round == cached_round_) return cached_;
  cached_.clear();
  if (options_.constant_loss) {
    cached_.push_back(Cell{space_.interval(), *options_.constant_loss});
  } else {
    Rng rng(mix_seed(seed_, round));
    std::vector<double> cuts(options_.cells - 1);
    for (double& c : cuts) c = rng.uniform(space_.lo(), space_.hi());
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    cuts.erase(std::remove(cuts.begin(), cuts.end(), space_.lo()), cuts.end());
    cuts.insert(cuts.begin(), space_.lo());
    cuts.push_back(space_.hi());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
      const double loss =
          std::clamp(0.6 * std::abs(mid - target_) / space_.width() + 0.4 * rng.uniform(), 0.0, 1.0);
      cached_.push_back(Cell{space_.cell(cuts[k], cuts[k + 1]), loss});
    }
  }
  cached_round_ = round;
  return cached_;
}

FeedbackObservation SyntheticEnvironment::step(double rho, std::size_t round) {
  if (!space_.contains(rho)) throw std::out_of_range("rho outside the synthetic space");
  const Partition& p = cells(round);
  auto it = std::upper_bound(p.begin(), p.end(), rho,
                             [](double x, const Cell& c) { return x < c.set.lo; });
  const Cell& cell = *(it == p.begin() ? it : std::prev(it));
  return FeedbackObservation{cell.set, cell.loss, cell.loss};
}

std::optional<Partition> SyntheticEnvironment::partition(std::size_t round) { return cells(round); }

}  // namespace pwlopt
