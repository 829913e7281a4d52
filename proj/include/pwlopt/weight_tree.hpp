// Copyright 2026 The pwlopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "pwlopt/param_core.hpp"
#include "pwlopt/rng.hpp"

namespace pwlopt {

/// A constant piece [lo, hi) of a positive weight function.
struct Piece {
  double lo = 0.0;
  double hi = 0.0;
  double value = 0.0;

  double mass() const noexcept { return value * (hi - lo); }
};

// Shared numeric policy of the weight backends. A multiplier is raised just
// enough that no piece in the updated range drops below kMinPieceValue, and
// the whole function is rescaled to unit average height once its total mass
// falls below kRenormalizeBelow. Sampling probabilities are ratios, so
// neither changes them beyond double resolution.
inline constexpr double kMinPieceValue = 1e-300;
inline constexpr double kRenormalizeBelow = 1e-150;

/// exp(-x), kept positive when it underflows so it stays a valid multiplier.
inline double decay_factor(double x) {
  return std::max(std::exp(-x), std::numeric_limits<double>::min());
}

/// Balanced tree over the pieces of a positive piecewise-constant function on
/// an interval. Every internal node caches, per child, the child's integral,
/// its smallest piece value and a pending multiplier, so Update, Integrate
/// and Draw cost O(log pieces).
///
/// The tree is a B+-tree: pieces sit in fixed-size bottom nodes and every
/// bottom node is at the same depth. The wide nodes keep a root-to-piece path
/// within a few cache lines, which matters once the function has 10^5 pieces.
class WeightTree {
 public:
  /// Uniform weight 1 over a non-degenerate domain.
  explicit WeightTree(const ParamInterval& domain);
  explicit WeightTree(const ParamSpace1D& space) : WeightTree(space.interval()) {}

  const ParamInterval& domain() const noexcept { return domain_; }

  /// Multiplies the function on [a, b) by factor > 0. Values never drop
  /// below kMinPieceValue; a factor that would push them lower is raised.
  void update(double a, double b, double factor);
  void update(const ParamInterval& set, double factor) { update(set.lo, set.hi, factor); }

  double integrate(double a, double b) const;
  double integrate(const ParamInterval& set) const { return integrate(set.lo, set.hi); }
  double total() const noexcept;

  /// Inverse-CDF piece selection: the piece holding the u-quantile of mass.
  Piece sample_piece(double u) const;
  /// A point from the density proportional to the function: one uniform picks
  /// the piece, a second places the point inside it.
  double draw(Rng& rng) const;

  /// Multiplies every piece by c > 0.
  void scale(double c);

  std::size_t piece_count() const noexcept { return piece_count_; }
  /// Nodes on a root-to-piece path, counting the bottom node.
  std::size_t height() const noexcept { return levels_ + 1; }
  double min_value() const noexcept;
  std::vector<Piece> pieces() const;

 private:
  using Index = std::int32_t;
  static constexpr int kBucket = 32;  // pieces per bottom node
  static constexpr int kFan = 16;     // children per internal node

  // Piece j covers [lo[j], lo[j + 1]); the last one ends where the node does.
  struct Bucket {
    int count = 0;
    double lo[kBucket];
    double value[kBucket];
  };

  // Child i covers [key[i], key[i + 1]). mass and minv include tag, which is
  // the multiplier not yet applied inside the child.
  struct Inner {
    int count = 0;
    double key[kFan];
    double tag[kFan];
    double mass[kFan];
    double minv[kFan];
    Index child[kFan];
  };

  double node_mass(std::size_t level, Index node, double end) const;
  double node_min(std::size_t level, Index node) const;
  double node_start(std::size_t level, Index node) const;
  void scale_node(std::size_t level, Index node, double factor);
  void push(std::size_t level, Index node, int i);
  void refresh(std::size_t level, Index node, int i, double end);
  Index insert_cut(std::size_t level, Index node, double end, double x);
  Index split_bucket(Index node);
  Index split_inner(Index node);
  void cut_at(double x);
  void apply_range(std::size_t level, Index node, double end, double a, double b,
                   double factor);
  double range_mass(std::size_t level, Index node, double end, double a, double b,
                    double factor) const;
  double range_min(std::size_t level, Index node, double end, double a, double b,
                   double factor) const;
  void check_range(double a, double b) const;
  void renormalize_if_needed();

  ParamInterval domain_;
  std::vector<Bucket> buckets_;
  std::vector<Inner> inners_;
  Index root_ = 0;
  std::size_t levels_ = 0;  // internal levels above the bottom nodes
  std::size_t piece_count_ = 1;
};

/// Sorted flat list of pieces with linear-time operations. Same contract and
/// numeric policy as WeightTree; used as its test oracle and as the naive
/// learner backend.
class FlatWeights {
 public:
  explicit FlatWeights(const ParamInterval& domain);
  explicit FlatWeights(const ParamSpace1D& space) : FlatWeights(space.interval()) {}

  const ParamInterval& domain() const noexcept { return domain_; }

  void update(double a, double b, double factor);
  void update(const ParamInterval& set, double factor) { update(set.lo, set.hi, factor); }

  double integrate(double a, double b) const;
  double integrate(const ParamInterval& set) const { return integrate(set.lo, set.hi); }
  double total() const noexcept;

  Piece sample_piece(double u) const;
  double draw(Rng& rng) const;

  void scale(double c);

  std::size_t piece_count() const noexcept { return pieces_.size(); }
  double min_value() const noexcept;
  const std::vector<Piece>& pieces() const noexcept { return pieces_; }

 private:
  std::size_t split_at(double x);
  void check_range(double a, double b) const;

  ParamInterval domain_;
  std::vector<Piece> pieces_;
};

}  // namespace pwlopt
