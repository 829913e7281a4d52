// Copyright 2026 The pwlopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "pwlopt/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pwlopt::clustering {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

DistanceMatrix::DistanceMatrix(std::size_t n, std::vector<double> entries, double bound)
    : n_(n), entries_(std::move(entries)), bound_(bound) {
  if (n == 0) throw std::invalid_argument("distance matrix needs at least one point");
  if (entries_.size() != n * n) throw std::invalid_argument("distance matrix must have n*n entries");
  if (!(bound > 0.0) || !std::isfinite(bound)) throw std::invalid_argument("bound B must be positive");
  for (std::size_t i = 0; i < n; ++i) {
    if (entries_[i * n + i] != 0.0) throw std::invalid_argument("distance matrix diagonal must be zero");
    for (std::size_t j = 0; j < n; ++j) {
      const double d = entries_[i * n + j];
      if (d != entries_[j * n + i]) {
        throw std::invalid_argument("distance matrix is not symmetric at (" + std::to_string(i) +
                                    ", " + std::to_string(j) + ")");
      }
      if (!(d >= 0.0 && d <= bound)) {
        throw std::invalid_argument("distance outside [0, B] at (" + std::to_string(i) + ", " +
                                    std::to_string(j) + ")");
      }
    }
  }
}

std::vector<std::size_t> ClusterTree::members(std::size_t node) const {
  std::vector<std::size_t> out;
  std::vector<std::size_t> stack{node};
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    if (v < leaves) {
      out.push_back(v);
    } else {
      stack.push_back(merges[v - leaves].first);
      stack.push_back(merges[v - leaves].second);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<double> critical_value(double dmin, double dmax, double other_dmin,
                                     double other_dmax) {
  const double delta_min = other_dmin - dmin;
  const double delta_max = other_dmax - dmax;
  if (delta_min == delta_max) return std::nullopt;
  return delta_min / (delta_min - delta_max);
}

RhoLinkage::RhoLinkage(const DistanceMatrix& distances, double rho)
    : n_(distances.size()),
      rho_(rho),
      dmin_(distances.entries()),
      dmax_(distances.entries()),
      active_(n_),
      node_of_slot_(n_),
      members_(n_) {
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw std::out_of_range("rho = " + std::to_string(rho) + " outside [0, 1]");
  }
  for (std::size_t i = 0; i < n_; ++i) {
    active_[i] = i;
    node_of_slot_[i] = i;
    members_[i] = {i};
  }
  tree_.leaves = n_;
}

void RhoLinkage::step() {
  if (done()) return;
  const auto linkage = [&](std::size_t a, std::size_t b) {
    return (1.0 - rho_) * dmin(a, b) + rho_ * dmax(a, b);
  };
  // Scanning slots in increasing order with a strict comparison breaks ties
  // lexicographically on (smaller slot, larger slot).
  std::size_t best_a = active_[0];
  std::size_t best_b = active_[1];
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < active_.size(); ++x) {
    for (std::size_t y = x + 1; y < active_.size(); ++y) {
      const double d = linkage(active_[x], active_[y]);
      if (d < best) {
        best = d;
        best_a = active_[x];
        best_b = active_[y];
      }
    }
  }

  const double chosen_min = dmin(best_a, best_b);
  const double chosen_max = dmax(best_a, best_b);
  for (std::size_t x = 0; x < active_.size(); ++x) {
    for (std::size_t y = x + 1; y < active_.size(); ++y) {
      const std::size_t a = active_[x];
      const std::size_t b = active_[y];
      if (a == best_a && b == best_b) continue;
      const auto c = critical_value(chosen_min, chosen_max, dmin(a, b), dmax(a, b));
      if (!c || !(*c > 0.0 && *c < 1.0)) continue;
      // At an exact tie the competitor takes over to the right when its line
      // is flatter, so this run belongs to the cell ending at rho.
      const bool competitor_wins_right = dmax(a, b) - dmin(a, b) < chosen_max - chosen_min;
      if (*c > rho_ || (*c == rho_ && competitor_wins_right)) {
        hi_ = std::min(hi_, *c);
      } else {
        lo_ = std::max(lo_, *c);
      }
    }
  }

  // best_a < best_b, so the merged cluster keeps slot best_a.
  for (std::size_t k : active_) {
    if (k == best_a || k == best_b) continue;
    const double lo_d = std::min(dmin(best_a, k), dmin(best_b, k));
    const double hi_d = std::max(dmax(best_a, k), dmax(best_b, k));
    dmin_[best_a * n_ + k] = dmin_[k * n_ + best_a] = lo_d;
    dmax_[best_a * n_ + k] = dmax_[k * n_ + best_a] = hi_d;
  }
  tree_.merges.emplace_back(node_of_slot_[best_a], node_of_slot_[best_b]);
  node_of_slot_[best_a] = n_ + tree_.merges.size() - 1;
  auto& kept = members_[best_a];
  kept.insert(kept.end(), members_[best_b].begin(), members_[best_b].end());
  std::sort(kept.begin(), kept.end());
  members_[best_b].clear();
  active_.erase(std::find(active_.begin(), active_.end(), best_b));
}

LinkageOutcome rho_linkage_with_feedback(double rho, const DistanceMatrix& distances) {
  RhoLinkage run(distances, rho);
  while (!run.done()) run.step();
  const ParamSpace1D unit(0.0, 1.0);
  return LinkageOutcome{run.tree(), ParamInterval::make(run.lo(), run.hi(), true,
                                                        run.hi() >= 1.0 || run.hi() == rho)};
}

std::vector<LinkageOutcome> linkage_cells(const DistanceMatrix& distances) {
  std::vector<LinkageOutcome> cells;
  const ParamSpace1D unit(0.0, 1.0);
  double start = 0.0;
  while (start < 1.0) {
    // A probe right at a crossing sits inside the rounding noise of the
    // linkage values, so the cell is taken from a run at its midpoint.
    double probe = start;
    double end = rho_linkage_with_feedback(probe, distances).feedback.hi;
    while (!(end > start)) {
      probe = std::nextafter(probe, 2.0);
      end = rho_linkage_with_feedback(probe, distances).feedback.hi;
    }
    LinkageOutcome run = rho_linkage_with_feedback(0.5 * (start + end), distances);
    while (run.feedback.lo > start && end - start > 1e-12) {
      end = run.feedback.lo;
      run = rho_linkage_with_feedback(0.5 * (start + end), distances);
    }
    const double stop = run.feedback.hi;
    run.feedback = unit.cell(start, stop);
    cells.push_back(std::move(run));
    start = stop;
  }
  return cells;
}

double tree_cost(const ClusterTree& tree, std::span<const int> labels, std::size_t k) {
  const std::size_t n = tree.leaves;
  if (labels.size() != n) throw std::invalid_argument("need one target label per point");
  if (k == 0 || k > n) throw std::invalid_argument("pruning size k must lie in [1, n]");
  if (tree.merges.size() + 1 != n) throw std::invalid_argument("tree is incomplete");

  std::map<int, std::size_t> ids;
  for (int label : labels) ids.emplace(label, ids.size());
  const std::size_t classes = ids.size();

  const std::size_t nodes = tree.node_count();
  std::vector<std::vector<std::size_t>> counts(nodes, std::vector<std::size_t>(classes, 0));
  std::vector<std::size_t> size(nodes, 1);
  // best[v][j]: fewest disagreeing points when v's subtree is cut into j clusters.
  constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max() / 4;
  std::vector<std::vector<std::size_t>> best(nodes);
  for (std::size_t v = 0; v < n; ++v) {
    counts[v][ids.at(labels[v])] = 1;
    best[v] = {kInf, 0};
  }
  for (std::size_t m = 0; m < tree.merges.size(); ++m) {
    const std::size_t v = n + m;
    const auto [l, r] = tree.merges[m];
    size[v] = size[l] + size[r];
    for (std::size_t c = 0; c < classes; ++c) counts[v][c] = counts[l][c] + counts[r][c];
    const std::size_t cap = std::min(k, size[v]);
    best[v].assign(cap + 1, kInf);
    best[v][1] = size[v] - *std::max_element(counts[v].begin(), counts[v].end());
    for (std::size_t jl = 1; jl < best[l].size(); ++jl) {
      for (std::size_t jr = 1; jr < best[r].size() && jl + jr <= cap; ++jr) {
        best[v][jl + jr] = std::min(best[v][jl + jr], best[l][jl] + best[r][jr]);
      }
    }
  }
  return static_cast<double>(best[tree.root()][k]) / static_cast<double>(n);
}

DistanceMatrix sample_smoothed_distances(std::size_t n, double bound, double kappa, Rng& rng,
                                         const DistanceMatrix* base) {
  if (!(bound > 0.0) || !std::isfinite(bound)) throw std::invalid_argument("bound B must be positive");
  if (!(kappa >= 1.0 / bound) || !std::isfinite(kappa)) {
    throw std::invalid_argument("kappa must be finite and >= 1/B");
  }
  if (base && base->size() != n) throw std::invalid_argument("base matrix has the wrong size");
  const double width = 1.0 / kappa;
  std::vector<double> entries(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double start = base ? std::clamp((*base)(i, j) - 0.5 * width, 0.0, bound - width)
                          : rng.uniform(0.0, bound - width);
      const double d = std::min(bound, start + width * rng.uniform());
      entries[i * n + j] = entries[j * n + i] = d;
    }
  }
  return DistanceMatrix(n, std::move(entries), bound);
}

DistanceMatrix read_distance_matrix(std::istream& in, std::optional<double> bound) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      try {
        row.push_back(std::stod(trim(field)));
      } catch (const std::exception&) {
        throw std::invalid_argument("line " + std::to_string(line_no) + ": not a number: '" +
                                    field + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  const std::size_t n = rows.size();
  std::vector<double> entries;
  entries.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) {
      throw std::invalid_argument("row " + std::to_string(i + 1) + " has " +
                                  std::to_string(rows[i].size()) + " columns, expected " +
                                  std::to_string(n));
    }
    entries.insert(entries.end(), rows[i].begin(), rows[i].end());
  }
  double b = bound.value_or(0.0);
  if (!bound) {
    for (double d : entries) b = std::max(b, d);
    if (b == 0.0) b = 1.0;
  }
  return DistanceMatrix(n, std::move(entries), b);
}

DistanceMatrix read_distance_matrix_file(const std::string& path, std::optional<double> bound) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open distance matrix file " + path);
  return read_distance_matrix(in, bound);
}

void write_distance_matrix(std::ostream& out, const DistanceMatrix& distances) {
  std::ostringstream buf;
  buf.precision(17);
  for (std::size_t i = 0; i < distances.size(); ++i) {
    for (std::size_t j = 0; j < distances.size(); ++j) {
      buf << (j ? "," : "") << distances(i, j);
    }
    buf << '\n';
  }
  out << buf.str();
}

std::vector<int> read_labels(std::istream& in) {
  std::map<std::string, int> ids;
  std::vector<int> labels;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto [it, inserted] = ids.emplace(line, static_cast<int>(ids.size()));
    labels.push_back(it->second);
  }
  return labels;
}

std::vector<int> read_labels_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open label file " + path);
  return read_labels(in);
}

namespace {

DistanceMatrix planted_base(std::size_t n, std::size_t k, double bound) {
  std::vector<double> entries(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) entries[i * n + j] = (i % k == j % k ? 0.3 : 0.7) * bound;
    }
  }
  return DistanceMatrix(n, std::move(entries), bound);
}

}  // namespace

Environment::Environment(Options options, std::uint64_t seed)
    : options_(options),
      seed_(seed),
      base_(planted_base(std::max<std::size_t>(options.points, 1),
                         std::max<std::size_t>(options.clusters, 1), options.bound)) {
  if (options.points < 2) throw std::invalid_argument("clustering environment needs n >= 2");
  if (options.clusters == 0 || options.clusters > options.points) {
    throw std::invalid_argument("cluster count k must lie in [1, n]");
  }
  if (!(options.kappa >= 1.0 / options.bound)) throw std::invalid_argument("kappa must be >= 1/B");
  labels_.resize(options.points);
  for (std::size_t i = 0; i < options.points; ++i) {
    labels_[i] = static_cast<int>(i % options.clusters);
  }
}

const DistanceMatrix& Environment::distances(std::size_t round) {
  if (round != cached_round_ || !cached_) {
    Rng rng(mix_seed(seed_, round));
    cached_ = sample_smoothed_distances(options_.points, options_.bound, options_.kappa, rng, &base_);
    cached_round_ = round;
  }
  return *cached_;
}

FeedbackObservation Environment::step(double rho, std::size_t round) {
  const LinkageOutcome outcome = rho_linkage_with_feedback(rho, distances(round));
  const double loss = tree_cost(outcome.tree, labels_, options_.clusters);
  return FeedbackObservation{outcome.feedback, loss, loss};
}

std::optional<Partition> Environment::partition(std::size_t round) {
  Partition cells;
  for (const LinkageOutcome& cell : linkage_cells(distances(round))) {
    cells.push_back(Cell{cell.feedback, tree_cost(cell.tree, labels_, options_.clusters)});
  }
  return cells;
}

}  // namespace pwlopt::clustering
