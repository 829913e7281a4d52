// Copyright 2026 The pwlopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace pwlopt {

/// A 1-D interval with explicit endpoint closedness. Feedback sets use the
/// half-open form [lo, hi), except the rightmost set of a partition which is
/// closed.
struct ParamInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_closed = true;
  bool hi_closed = false;

  static ParamInterval closed(double lo, double hi) { return make(lo, hi, true, true); }
  static ParamInterval half_open(double lo, double hi) { return make(lo, hi, true, false); }
  // Throws std::invalid_argument when the invariants do not hold.
  static ParamInterval make(double lo, double hi, bool lo_closed, bool hi_closed);

  double width() const noexcept { return hi - lo; }
  double midpoint() const noexcept { return lo + 0.5 * (hi - lo); }
  bool degenerate() const noexcept { return lo == hi; }
  bool contains(double x) const noexcept;
  // Containment of `inner` as a point set, ignoring endpoint closedness.
  bool covers(const ParamInterval& inner) const noexcept {
    return inner.lo >= lo && inner.hi <= hi;
  }

  friend bool operator==(const ParamInterval&, const ParamInterval&) = default;
};

/// The parameter space [lo, hi] of a one-dimensional learner.
class ParamSpace1D {
 public:
  ParamSpace1D(double lo, double hi);

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double width() const noexcept { return hi_ - lo_; }
  double radius() const noexcept { return 0.5 * (hi_ - lo_); }
  double clamp(double x) const noexcept { return x < lo_ ? lo_ : (x > hi_ ? hi_ : x); }
  bool contains(double x) const noexcept { return x >= lo_ && x <= hi_; }
  ParamInterval interval() const { return ParamInterval::closed(lo_, hi_); }

  // Cell [a, b) of a partition of this space; closed on the right when b == hi.
  ParamInterval cell(double a, double b) const;

  friend bool operator==(const ParamSpace1D&, const ParamSpace1D&) = default;

 private:
  double lo_;
  double hi_;
};

using LossFn = std::function<double(double)>;

/// What the learner sees after playing a point: the feedback set containing it
/// and the loss, which is constant on the set for every environment here.
struct FeedbackObservation {
  ParamInterval set;
  double loss = 0.0;
  double loss_at_play = 0.0;
};

/// One piece of a piecewise-constant loss.
struct Cell {
  ParamInterval set;
  double loss = 0.0;
};

/// Cells sorted by position, tiling the parameter space.
using Partition = std::vector<Cell>;

/// Oblivious adversary: round t's loss is fixed before the learner moves.
class SemiBanditEnvironment {
 public:
  virtual ~SemiBanditEnvironment() = default;

  virtual ParamSpace1D space() const = 0;
  virtual double loss_bound() const = 0;
  virtual FeedbackObservation step(double rho, std::size_t round) = 0;

  // Complete feedback system of a round; nullopt when the environment cannot
  // enumerate it.
  virtual std::optional<Partition> partition(std::size_t round) {
    static_cast<void>(round);
    return std::nullopt;
  }
};

/// Throws std::invalid_argument unless `partition` is sorted, gap-free and
/// covers `space` exactly.
void check_partition(const Partition& partition, const ParamSpace1D& space);

// Utility in [0, H] to loss in [0, H]: H - u. Feedback sets are unchanged.
LossFn utility_to_loss(LossFn utility, double bound);
FeedbackObservation utility_to_loss(const FeedbackObservation& utility, double bound);

// Loss in [0, H] to loss in [0, 1].
LossFn rescale_losses(LossFn loss, double bound);
FeedbackObservation rescale_losses(const FeedbackObservation& obs, double bound);
Partition rescale_losses(Partition partition, double bound);

struct ExtendedDomain {
  ParamSpace1D space;
  LossFn loss;
};

/// Enlarges the space by r0 on both sides and evaluates the original loss at
/// the projection (clamp) of the played point.
ExtendedDomain extend_domain_with_projection(const ParamSpace1D& space, double r0, LossFn loss);

/// Presents an environment with losses divided by its bound, so learners see
/// values in [0, 1].
class RescaledEnvironment final : public SemiBanditEnvironment {
 public:
  explicit RescaledEnvironment(SemiBanditEnvironment& inner) : inner_(&inner) {}

  ParamSpace1D space() const override { return inner_->space(); }
  double loss_bound() const override { return 1.0; }
  FeedbackObservation step(double rho, std::size_t round) override;
  std::optional<Partition> partition(std::size_t round) override;

 private:
  SemiBanditEnvironment* inner_;
};

/// Clamp-extension of an environment's domain: plays outside the original
/// space are projected back, and feedback sets touching an original boundary
/// are stretched to the new boundary.
class ProjectedEnvironment final : public SemiBanditEnvironment {
 public:
  ProjectedEnvironment(SemiBanditEnvironment& inner, double r0);

  ParamSpace1D space() const override { return extended_; }
  double loss_bound() const override { return inner_->loss_bound(); }
  FeedbackObservation step(double rho, std::size_t round) override;
  std::optional<Partition> partition(std::size_t round) override;

 private:
  ParamInterval stretch(const ParamInterval& set) const;

  SemiBanditEnvironment* inner_;
  ParamSpace1D original_;
  ParamSpace1D extended_;
};

}  // namespace pwlopt
