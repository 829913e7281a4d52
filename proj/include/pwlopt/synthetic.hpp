// Copyright 2026 The pwlopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "pwlopt/param_core.hpp"

namespace pwlopt {

/// Random piecewise-constant losses on [lo, hi]: each round cuts the space
/// at cells - 1 uniform points and gives each cell the loss
/// 0.6 |mid - target| / width + 0.4 U, where target is fixed per seed.
/// With `constant_loss` set every round is a single cell with that loss.
class SyntheticEnvironment final : public SemiBanditEnvironment {
 public:
  struct Options {
    std::size_t cells = 8;
    double lo = 0.0;
    double hi = 1.0;
    std::optional<double> constant_loss;
  };

  SyntheticEnvironment(Options options, std::uint64_t seed);

  ParamSpace1D space() const override { return space_; }
  double loss_bound() const override { return 1.0; }
  FeedbackObservation step(double rho, std::size_t round) override;
  std::optional<Partition> partition(std::size_t round) override;

 private:
  const Partition& cells(std::size_t round);

  Options options_;
  ParamSpace1D space_;
  std::uint64_t seed_;
  double target_;
  std::size_t cached_round_ = static_cast<std::size_t>(-1);
  Partition cached_;
};

}  // namespace pwlopt
