// Copyright 2026 The pwlopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pwlopt/param_core.hpp"
#include "pwlopt/rng.hpp"

namespace pwlopt::clustering {

/// Symmetric n x n distances in [0, B] with a zero diagonal.
class DistanceMatrix {
 public:
  DistanceMatrix(std::size_t n, std::vector<double> entries, double bound);

  std::size_t size() const noexcept { return n_; }
  double bound() const noexcept { return bound_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return entries_[i * n_ + j]; }
  const std::vector<double>& entries() const noexcept { return entries_; }

 private:
  std::size_t n_;
  std::vector<double> entries_;
  double bound_;
};

/// Binary merge tree. Nodes 0..n-1 are the points; node n + k is the k-th
/// merge, joining the two nodes in merges[k].
struct ClusterTree {
  std::size_t leaves = 0;
  std::vector<std::pair<std::size_t, std::size_t>> merges;

  std::size_t node_count() const noexcept { return leaves + merges.size(); }
  std::size_t root() const noexcept { return node_count() - 1; }
  std::vector<std::size_t> members(std::size_t node) const;

  friend bool operator==(const ClusterTree&, const ClusterTree&) = default;
};

struct LinkageOutcome {
  ClusterTree tree;
  ParamInterval feedback;
};

/// rho at which (1 - rho) dmin + rho dmax of the two candidate merges
/// coincide; nullopt when the two lines are parallel.
std::optional<double> critical_value(double dmin, double dmax, double other_dmin,
                                     double other_dmax);

/// Step-by-step rho-linkage. Keeps the min and max inter-cluster distance
/// matrices (updated in O(n) per merge) and shrinks the interval of
/// parameters that reproduce every merge made so far.
class RhoLinkage {
 public:
  RhoLinkage(const DistanceMatrix& distances, double rho);

  bool done() const noexcept { return active_.size() <= 1; }
  void step();

  // Clusters are addressed by slot: the smallest point index they contain.
  const std::vector<std::size_t>& active() const noexcept { return active_; }
  double dmin(std::size_t a, std::size_t b) const noexcept { return dmin_[a * n_ + b]; }
  double dmax(std::size_t a, std::size_t b) const noexcept { return dmax_[a * n_ + b]; }
  const std::vector<std::size_t>& members(std::size_t slot) const { return members_[slot]; }

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  const ClusterTree& tree() const noexcept { return tree_; }

 private:
  std::size_t n_;
  double rho_;
  std::vector<double> dmin_;
  std::vector<double> dmax_;
  std::vector<std::size_t> active_;
  std::vector<std::size_t> node_of_slot_;
  std::vector<std::vector<std::size_t>> members_;
  ClusterTree tree_;
  double lo_ = 0.0;
  double hi_ = 1.0;
};

/// Runs rho-linkage to completion, returning the tree and the interval of
/// parameters in [0, 1] that produce the same merge sequence.
LinkageOutcome rho_linkage_with_feedback(double rho, const DistanceMatrix& distances);

/// Every cell of the feedback system of one instance, left to right, with
/// the tree built inside it.
std::vector<LinkageOutcome> linkage_cells(const DistanceMatrix& distances);

/// Fraction of points disagreeing with the majority target label of their
/// cluster, minimised over all prunings of the tree into k clusters.
double tree_cost(const ClusterTree& tree, std::span<const int> labels, std::size_t k);

/// Each upper-triangle entry uniform on a sub-interval of [0, B] of width
/// 1/kappa, placed at random or centred on `base` when given.
DistanceMatrix sample_smoothed_distances(std::size_t n, double bound, double kappa, Rng& rng,
                                         const DistanceMatrix* base = nullptr);

// n rows of n comma-separated numbers. B defaults to the largest entry.
DistanceMatrix read_distance_matrix(std::istream& in, std::optional<double> bound = std::nullopt);
DistanceMatrix read_distance_matrix_file(const std::string& path,
                                         std::optional<double> bound = std::nullopt);
void write_distance_matrix(std::ostream& out, const DistanceMatrix& distances);
// One label per line; labels are arbitrary tokens mapped to 0, 1, ... by
// first appearance.
std::vector<int> read_labels(std::istream& in);
std::vector<int> read_labels_file(const std::string& path);

/// Planted clustering: point i has label i mod k, base distances are 0.3 B
/// within a class and 0.7 B across, and each round smooths them afresh.
/// The loss is tree_cost against the planted labels, already in [0, 1].
class Environment final : public SemiBanditEnvironment {
 public:
  struct Options {
    std::size_t points = 8;
    double bound = 1.0;
    double kappa = 2.0;
    std::size_t clusters = 2;
  };

  Environment(Options options, std::uint64_t seed);

  ParamSpace1D space() const override { return ParamSpace1D(0.0, 1.0); }
  double loss_bound() const override { return 1.0; }
  FeedbackObservation step(double rho, std::size_t round) override;
  std::optional<Partition> partition(std::size_t round) override;

  const DistanceMatrix& distances(std::size_t round);
  const std::vector<int>& labels() const noexcept { return labels_; }

 private:
  Options options_;
  std::uint64_t seed_;
  std::vector<int> labels_;
  DistanceMatrix base_;
  std::size_t cached_round_ = static_cast<std::size_t>(-1);
  std::optional<DistanceMatrix> cached_;
};

}  // namespace pwlopt::clustering
