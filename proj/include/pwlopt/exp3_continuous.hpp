// Copyright 2026 The pwlopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "pwlopt/param_core.hpp"
#include "pwlopt/rng.hpp"
#include "pwlopt/weight_tree.hpp"

namespace pwlopt {

template <class W>
concept WeightBackend = requires(W w, const W cw, double x, Rng& rng) {
  { W(ParamSpace1D(0.0, 1.0)) };
  w.update(x, x, x);
  { cw.integrate(x, x) } -> std::convertible_to<double>;
  { cw.total() } -> std::convertible_to<double>;
  { cw.draw(rng) } -> std::convertible_to<double>;
  { cw.piece_count() } -> std::convertible_to<std::size_t>;
};

/// The importance-weighted loss estimate of one round: `value` on `set`, zero
/// elsewhere.
struct EstimatedLoss {
  ParamInterval set;
  double value = 0.0;
  double probability = 0.0;  // p_t(set) under the pre-update weights
};

/// sqrt(d ln(R/r) / (T M)), clamped to (0, 1].
double recommended_lambda(int dim, double radius, double r, long long horizon, long long cells);

/// Continuous Exp3-SET on a 1-D parameter space. Plays a point drawn from the
/// normalised weight density, and after each observation multiplies the
/// weight on the observed feedback set by exp(-lambda * loss / p(set)).
template <WeightBackend Weights>
class ContinuousExp3Set {
 public:
  ContinuousExp3Set(const ParamSpace1D& space, double lambda)
      : space_(space), weights_(space), lambda_(lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
      throw std::invalid_argument("step size must lie in [0, 1], got " + std::to_string(lambda));
    }
  }

  double sample(Rng& rng) const { return weights_.draw(rng); }

  /// p_t(set) from exact integrals of the current weights.
  double probability(const ParamInterval& set) const {
    return weights_.integrate(clip(set)) / weights_.total();
  }

  EstimatedLoss observe(double played, const FeedbackObservation& feedback) {
    const ParamInterval set = clip(feedback.set);
    if (set.degenerate()) throw std::invalid_argument("feedback set has zero width");
    const double slack = 1e-12 * space_.width();
    if (played < set.lo - slack || played > set.hi + slack) {
      throw std::invalid_argument("played point " + std::to_string(played) +
                                  " lies outside its feedback set");
    }
    check_loss(feedback.loss);
    const double p = probability(set);
    if (!(p > 0.0)) throw std::domain_error("feedback set has zero probability");
    EstimatedLoss estimate{set, feedback.loss / p, p};
    if (estimate.value > 0.0) weights_.update(set, decay_factor(lambda_ * estimate.value));
    ++round_;
    cumulative_loss_ += feedback.loss_at_play;
    return estimate;
  }

  /// Full-information round: every cell is observed with probability one.
  void observe_full(const Partition& cells, double loss_at_play) {
    for (const Cell& cell : cells) check_loss(cell.loss);
    for (const Cell& cell : cells) {
      const ParamInterval set = clip(cell.set);
      if (cell.loss > 0.0 && !set.degenerate()) {
        weights_.update(set, decay_factor(lambda_ * cell.loss));
      }
    }
    ++round_;
    cumulative_loss_ += loss_at_play;
  }

  const ParamSpace1D& space() const noexcept { return space_; }
  const Weights& weights() const noexcept { return weights_; }
  double lambda() const noexcept { return lambda_; }
  std::size_t round() const noexcept { return round_; }
  double cumulative_loss() const noexcept { return cumulative_loss_; }

 private:
  static void check_loss(double loss) {
    if (!(loss >= 0.0 && loss <= 1.0)) {
      throw std::invalid_argument("loss " + std::to_string(loss) +
                                  " outside [0, 1]; rescale by the loss bound first");
    }
  }

  ParamInterval clip(const ParamInterval& set) const {
    ParamInterval out = set;
    out.lo = space_.clamp(set.lo);
    out.hi = space_.clamp(set.hi);
    return out;
  }

  ParamSpace1D space_;
  Weights weights_;
  double lambda_;
  std::size_t round_ = 0;
  double cumulative_loss_ = 0.0;
};

using TreeExp3Set = ContinuousExp3Set<WeightTree>;
using NaiveExp3Set = ContinuousExp3Set<FlatWeights>;

struct Trajectory {
  std::vector<double> played;
  std::vector<double> loss;
  std::vector<double> cumulative;
  std::vector<double> learner_seconds;  // sample + observe time per round

  std::size_t size() const noexcept { return played.size(); }
  double total_loss() const noexcept { return cumulative.empty() ? 0.0 : cumulative.back(); }
};

/// Plays `horizon` semi-bandit rounds against `env`, whose losses must
/// already lie in [0, 1].
template <WeightBackend Weights = WeightTree>
Trajectory run_game(SemiBanditEnvironment& env, std::size_t horizon, double lambda, Rng& rng,
                    bool record_time = false) {
  ContinuousExp3Set<Weights> learner(env.space(), lambda);
  Trajectory out;
  out.played.reserve(horizon);
  out.loss.reserve(horizon);
  out.cumulative.reserve(horizon);
  using Clock = std::chrono::steady_clock;
  for (std::size_t t = 0; t < horizon; ++t) {
    const auto t0 = record_time ? Clock::now() : Clock::time_point{};
    const double rho = learner.sample(rng);
    const auto t1 = record_time ? Clock::now() : Clock::time_point{};
    const FeedbackObservation obs = env.step(rho, t);
    const auto t2 = record_time ? Clock::now() : Clock::time_point{};
    learner.observe(rho, obs);
    if (record_time) {
      const auto t3 = Clock::now();
      out.learner_seconds.push_back(std::chrono::duration<double>((t1 - t0) + (t3 - t2)).count());
    }
    out.played.push_back(rho);
    out.loss.push_back(obs.loss_at_play);
    out.cumulative.push_back(learner.cumulative_loss());
  }
  return out;
}

/// Anytime variant: restarts the learner at horizons 1, 2, 4, ... with the
/// step size `lambda_for(h)` tuned for each epoch length h.
template <WeightBackend Weights = WeightTree, class LambdaFor>
Trajectory run_game_doubling(SemiBanditEnvironment& env, std::size_t horizon,
                             LambdaFor&& lambda_for, Rng& rng) {
  Trajectory out;
  double cumulative = 0.0;
  std::size_t t = 0;
  for (std::size_t epoch = 1; t < horizon; epoch *= 2) {
    ContinuousExp3Set<Weights> learner(env.space(), lambda_for(epoch));
    for (std::size_t k = 0; k < epoch && t < horizon; ++k, ++t) {
      const double rho = learner.sample(rng);
      const FeedbackObservation obs = env.step(rho, t);
      learner.observe(rho, obs);
      cumulative += obs.loss_at_play;
      out.played.push_back(rho);
      out.loss.push_back(obs.loss_at_play);
      out.cumulative.push_back(cumulative);
    }
  }
  return out;
}

}  // namespace pwlopt
