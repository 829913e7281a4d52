// Copyright 2026 The pwlopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pwlopt/param_core.hpp"
#include "pwlopt/rng.hpp"

namespace pwlopt::knapsack {

inline constexpr double kDefaultRange = 10.0;

/// n items with values in [0, 1] and sizes in [1, C].
struct Instance {
  std::vector<double> values;
  std::vector<double> sizes;
  double capacity = 0.0;

  std::size_t size() const noexcept { return values.size(); }
  // Throws std::invalid_argument on a malformed instance.
  void validate() const;
};

struct Outcome {
  std::vector<std::size_t> selected;  // in the order they were packed
  std::vector<std::size_t> order;     // items by descending score
  ParamInterval feedback;             // parameters giving the same order
  double total_value = 0.0;
};

/// Score order for parameter rho: v_i / s_i^rho descending, ties by index.
std::vector<std::size_t> score_order(const Instance& inst, double rho);

/// Greedy packing in the given order.
std::vector<std::size_t> pack(const Instance& inst, const std::vector<std::size_t>& order);

/// The rho at which items a and b swap score order, or nullopt when they
/// never do (equal sizes or a zero value).
std::optional<double> critical_value(double value_a, double size_a, double value_b,
                                     double size_b);

/// One greedy run that also reports the feedback interval around rho in
/// [0, range], from the critical values of consecutive items in the order.
Outcome greedy_with_feedback(double rho, const Instance& inst, double range = kDefaultRange);

/// Raw loss C - value in [0, C].
double loss(const Outcome& outcome, double capacity);
/// Loss rescaled to [0, 1].
double scaled_loss(const Outcome& outcome, double capacity);

/// Every pairwise critical value strictly inside (0, range), sorted, unique.
std::vector<double> enumerate_critical_values(const Instance& inst,
                                              double range = kDefaultRange);

/// Full-information feedback: one greedy run per cell between consecutive
/// critical values. Losses are raw (in [0, C]).
Partition full_information(const Instance& inst, double range = kDefaultRange);

/// Values drawn independently, each uniform on a random sub-interval of
/// [0, 1] of width 1/kappa (so its density is at most kappa). Sizes are
/// uniform on [1, C] unless given.
Instance sample_smoothed_instance(std::size_t n, double capacity, double kappa, Rng& rng,
                                  const std::vector<double>* sizes = nullptr);

// Instance files:
//   capacity,<C>
//   v,s
//   <v_1>,<s_1>
//   ...
Instance read_instance(std::istream& in);
Instance read_instance_file(const std::string& path);
void write_instance(std::ostream& out, const Instance& inst);

/// A kappa-smooth instance each round, derived from (seed, round). By
/// default the adversary fixes each item's size and value sub-interval once
/// per seed and only the values are redrawn every round; with
/// `fresh_instances` every round is an independent draw of
/// sample_smoothed_instance. Losses are raw; wrap in RescaledEnvironment
/// before handing to a learner.
class Environment final : public SemiBanditEnvironment {
 public:
  struct Options {
    std::size_t items = 10;
    double capacity = 10.0;
    double kappa = 10.0;
    double range = kDefaultRange;
    bool fresh_instances = false;
  };

  Environment(Options options, std::uint64_t seed);

  ParamSpace1D space() const override { return ParamSpace1D(0.0, options_.range); }
  double loss_bound() const override { return options_.capacity; }
  FeedbackObservation step(double rho, std::size_t round) override;
  std::optional<Partition> partition(std::size_t round) override;

  const Instance& instance(std::size_t round);

 private:
  Options options_;
  std::uint64_t seed_;
  std::vector<double> starts_;
  std::vector<double> sizes_;
  std::size_t cached_round_ = static_cast<std::size_t>(-1);
  Instance cached_;
};

}  // namespace pwlopt::knapsack
