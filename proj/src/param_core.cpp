// Copyright 2026 The pwlopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "pwlopt/param_core.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace pwlopt {

namespace {

void require_bound(double bound) {
  if (!(bound > 0.0) || !std::isfinite(bound)) {
    throw std::invalid_argument("loss bound H must be positive and finite, got " +
                                std::to_string(bound));
  }
}

}  // namespace

ParamInterval ParamInterval::make(double lo, double hi, bool lo_closed, bool hi_closed) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("interval endpoints must be finite");
  }
  if (lo > hi) {
    throw std::invalid_argument("interval has lo > hi: [" + std::to_string(lo) + ", " +
                                std::to_string(hi) + "]");
  }
  if (lo == hi && !(lo_closed && hi_closed)) {
    throw std::invalid_argument("degenerate interval must be closed on both ends");
  }
  return ParamInterval{lo, hi, lo_closed, hi_closed};
}

bool ParamInterval::contains(double x) const noexcept {
  const bool above = lo_closed ? x >= lo : x > lo;
  const bool below = hi_closed ? x <= hi : x < hi;
  return above && below;
}

ParamSpace1D::ParamSpace1D(double lo, double hi) : lo_(lo), hi_(hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
    throw std::invalid_argument("parameter space needs finite lo < hi");
  }
}

ParamInterval ParamSpace1D::cell(double a, double b) const {
  return ParamInterval::make(a, b, true, b >= hi_ || a == b);
}

void check_partition(const Partition& partition, const ParamSpace1D& space) {
  if (partition.empty()) throw std::invalid_argument("empty partition");
  double cursor = space.lo();
  for (const Cell& cell : partition) {
    if (cell.set.lo != cursor) {
      throw std::invalid_argument("partition has a gap or overlap at " +
                                  std::to_string(cell.set.lo));
    }
    cursor = cell.set.hi;
  }
  if (cursor != space.hi()) throw std::invalid_argument("partition does not reach space end");
}

LossFn utility_to_loss(LossFn utility, double bound) {
  require_bound(bound);
  return [u = std::move(utility), bound](double rho) { return bound - u(rho); };
}

FeedbackObservation utility_to_loss(const FeedbackObservation& utility, double bound) {
  require_bound(bound);
  return FeedbackObservation{utility.set, bound - utility.loss, bound - utility.loss_at_play};
}

LossFn rescale_losses(LossFn loss, double bound) {
  require_bound(bound);
  return [l = std::move(loss), bound](double rho) { return l(rho) / bound; };
}

FeedbackObservation rescale_losses(const FeedbackObservation& obs, double bound) {
  require_bound(bound);
  return FeedbackObservation{obs.set, obs.loss / bound, obs.loss_at_play / bound};
}

Partition rescale_losses(Partition partition, double bound) {
  require_bound(bound);
  for (Cell& cell : partition) cell.loss /= bound;
  return partition;
}

ExtendedDomain extend_domain_with_projection(const ParamSpace1D& space, double r0, LossFn loss) {
  if (!(r0 > 0.0) || !std::isfinite(r0)) throw std::invalid_argument("r0 must be positive");
  ParamSpace1D extended(space.lo() - r0, space.hi() + r0);
  return ExtendedDomain{extended,
                        [space, l = std::move(loss)](double rho) { return l(space.clamp(rho)); }};
}

FeedbackObservation RescaledEnvironment::step(double rho, std::size_t round) {
  return rescale_losses(inner_->step(rho, round), inner_->loss_bound());
}

std::optional<Partition> RescaledEnvironment::partition(std::size_t round) {
  auto cells = inner_->partition(round);
  if (!cells) return std::nullopt;
  return rescale_losses(std::move(*cells), inner_->loss_bound());
}

ProjectedEnvironment::ProjectedEnvironment(SemiBanditEnvironment& inner, double r0)
    : inner_(&inner),
      original_(inner.space()),
      extended_(extend_domain_with_projection(inner.space(), r0, [](double) { return 0.0; })
                    .space) {}

ParamInterval ProjectedEnvironment::stretch(const ParamInterval& set) const {
  ParamInterval out = set;
  if (set.lo <= original_.lo()) {
    out.lo = extended_.lo();
    out.lo_closed = true;
  }
  if (set.hi >= original_.hi()) {
    out.hi = extended_.hi();
    out.hi_closed = true;
  }
  return out;
}

FeedbackObservation ProjectedEnvironment::step(double rho, std::size_t round) {
  FeedbackObservation obs = inner_->step(original_.clamp(rho), round);
  obs.set = stretch(obs.set);
  return obs;
}

std::optional<Partition> ProjectedEnvironment::partition(std::size_t round) {
  auto cells = inner_->partition(round);
  if (!cells) return std::nullopt;
  for (Cell& cell : *cells) cell.set = stretch(cell.set);
  return cells;
}

}  // namespace pwlopt
