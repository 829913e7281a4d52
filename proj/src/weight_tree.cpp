// Copyright 2026 The pwlopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "pwlopt/weight_tree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pwlopt {

namespace {

void check_domain(const ParamInterval& domain) {
  if (domain.degenerate()) throw std::invalid_argument("weight domain must be non-degenerate");
}

void check_factor(double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw std::invalid_argument("weight multiplier must be positive and finite, got " +
                                std::to_string(factor));
  }
}

void check_range_in(const ParamInterval& domain, double a, double b) {
  if (!(a <= b) || a < domain.lo || b > domain.hi) {
    throw std::out_of_range("interval [" + std::to_string(a) + ", " + std::to_string(b) +
                            ") escapes the weight domain");
  }
}

// Raise factor so that `smallest * factor` stays representable.
double effective_factor(double factor, double smallest) {
  return std::max(factor, std::min(1.0, kMinPieceValue / smallest));
}

double point_in(const Piece& piece, double u) {
  const double x = piece.lo + u * (piece.hi - piece.lo);
  return x < piece.hi ? x : std::nextafter(piece.hi, piece.lo);
}

}  // namespace

// ---------------------------------------------------------------------------
// WeightTree

WeightTree::WeightTree(const ParamInterval& domain) : domain_(domain) {
  check_domain(domain);
  Bucket first;
  first.count = 1;
  first.lo[0] = domain.lo;
  first.value[0] = 1.0;
  buckets_.push_back(first);
}

double WeightTree::node_mass(std::size_t level, Index node, double end) const {
  double sum = 0.0;
  if (level == 0) {
    const Bucket& b = buckets_[node];
    for (int j = 0; j < b.count; ++j) {
      const double hi = j + 1 < b.count ? b.lo[j + 1] : end;
      sum += b.value[j] * (hi - b.lo[j]);
    }
    return sum;
  }
  const Inner& n = inners_[node];
  for (int i = 0; i < n.count; ++i) sum += n.mass[i];
  return sum;
}

double WeightTree::node_min(std::size_t level, Index node) const {
  if (level == 0) {
    const Bucket& b = buckets_[node];
    return *std::min_element(b.value, b.value + b.count);
  }
  const Inner& n = inners_[node];
  return *std::min_element(n.minv, n.minv + n.count);
}

double WeightTree::node_start(std::size_t level, Index node) const {
  return level == 0 ? buckets_[node].lo[0] : inners_[node].key[0];
}

void WeightTree::scale_node(std::size_t level, Index node, double factor) {
  if (level == 0) {
    Bucket& b = buckets_[node];
    for (int j = 0; j < b.count; ++j) b.value[j] *= factor;
    return;
  }
  Inner& n = inners_[node];
  for (int i = 0; i < n.count; ++i) {
    n.tag[i] *= factor;
    n.mass[i] *= factor;
    n.minv[i] *= factor;
  }
}

// Applies child i's pending multiplier inside the child.
void WeightTree::push(std::size_t level, Index node, int i) {
  Inner& n = inners_[node];
  if (n.tag[i] == 1.0) return;
  scale_node(level - 1, n.child[i], n.tag[i]);
  n.tag[i] = 1.0;
}

void WeightTree::refresh(std::size_t level, Index node, int i, double end) {
  Inner& n = inners_[node];
  const double child_end = i + 1 < n.count ? n.key[i + 1] : end;
  n.mass[i] = n.tag[i] * node_mass(level - 1, n.child[i], child_end);
  n.minv[i] = n.tag[i] * node_min(level - 1, n.child[i]);
}

WeightTree::Index WeightTree::split_bucket(Index node) {
  Bucket right;
  {
    Bucket& b = buckets_[node];
    const int half = b.count / 2;
    right.count = b.count - half;
    std::copy(b.lo + half, b.lo + b.count, right.lo);
    std::copy(b.value + half, b.value + b.count, right.value);
    b.count = half;
  }
  buckets_.push_back(right);
  return static_cast<Index>(buckets_.size() - 1);
}

WeightTree::Index WeightTree::split_inner(Index node) {
  Inner right;
  {
    Inner& n = inners_[node];
    const int half = n.count / 2;
    right.count = n.count - half;
    std::copy(n.key + half, n.key + n.count, right.key);
    std::copy(n.tag + half, n.tag + n.count, right.tag);
    std::copy(n.mass + half, n.mass + n.count, right.mass);
    std::copy(n.minv + half, n.minv + n.count, right.minv);
    std::copy(n.child + half, n.child + n.count, right.child);
    n.count = half;
  }
  inners_.push_back(right);
  return static_cast<Index>(inners_.size() - 1);
}

// Makes x the start of a piece below `node`, which covers [.., end). Returns
// the new right sibling when the node had to split, else -1.
WeightTree::Index WeightTree::insert_cut(std::size_t level, Index node, double end, double x) {
  if (level == 0) {
    Bucket& b = buckets_[node];
    const int j = static_cast<int>(std::upper_bound(b.lo, b.lo + b.count, x) - b.lo) - 1;
    if (b.lo[j] == x) return -1;
    for (int k = b.count; k > j + 1; --k) {
      b.lo[k] = b.lo[k - 1];
      b.value[k] = b.value[k - 1];
    }
    b.lo[j + 1] = x;
    b.value[j + 1] = b.value[j];
    ++b.count;
    ++piece_count_;
    return b.count == kBucket ? split_bucket(node) : -1;
  }
  int i = 0;
  double child_end = end;
  Index child = 0;
  {
    Inner& n = inners_[node];
    i = static_cast<int>(std::upper_bound(n.key, n.key + n.count, x) - n.key) - 1;
    if (n.key[i] == x) return -1;
    push(level, node, i);
    if (i + 1 < n.count) child_end = n.key[i + 1];
    child = n.child[i];
  }
  const Index sibling = insert_cut(level - 1, child, child_end, x);
  if (sibling >= 0) {
    Inner& n = inners_[node];
    for (int k = n.count; k > i + 1; --k) {
      n.key[k] = n.key[k - 1];
      n.tag[k] = n.tag[k - 1];
      n.mass[k] = n.mass[k - 1];
      n.minv[k] = n.minv[k - 1];
      n.child[k] = n.child[k - 1];
    }
    n.key[i + 1] = node_start(level - 1, sibling);
    n.tag[i + 1] = 1.0;
    n.child[i + 1] = sibling;
    ++n.count;
    refresh(level, node, i + 1, end);
  }
  refresh(level, node, i, end);
  return inners_[node].count == kFan ? split_inner(node) : -1;
}

void WeightTree::cut_at(double x) {
  if (x <= domain_.lo || x >= domain_.hi) return;
  const Index sibling = insert_cut(levels_, root_, domain_.hi, x);
  if (sibling < 0) return;
  Inner top;
  top.count = 2;
  top.key[0] = domain_.lo;
  top.key[1] = node_start(levels_, sibling);
  top.tag[0] = top.tag[1] = 1.0;
  top.child[0] = root_;
  top.child[1] = sibling;
  inners_.push_back(top);
  root_ = static_cast<Index>(inners_.size() - 1);
  ++levels_;
  refresh(levels_, root_, 0, domain_.hi);
  refresh(levels_, root_, 1, domain_.hi);
}

// Multiplies [a, b) by factor. Both ends must already start pieces.
void WeightTree::apply_range(std::size_t level, Index node, double end, double a, double b,
                             double factor) {
  if (level == 0) {
    Bucket& bk = buckets_[node];
    for (int j = 0; j < bk.count && bk.lo[j] < b; ++j) {
      if (bk.lo[j] >= a) bk.value[j] *= factor;
    }
    return;
  }
  const int count = inners_[node].count;
  for (int i = 0; i < count; ++i) {
    Inner& n = inners_[node];
    const double lo = n.key[i];
    const double hi = i + 1 < count ? n.key[i + 1] : end;
    if (hi <= a) continue;
    if (lo >= b) break;
    if (a <= lo && hi <= b) {
      n.tag[i] *= factor;
      n.mass[i] *= factor;
      n.minv[i] *= factor;
      continue;
    }
    push(level, node, i);
    apply_range(level - 1, n.child[i], hi, a, b, factor);
    refresh(level, node, i, end);
  }
}

double WeightTree::range_mass(std::size_t level, Index node, double end, double a, double b,
                              double factor) const {
  double sum = 0.0;
  if (level == 0) {
    const Bucket& bk = buckets_[node];
    for (int j = 0; j < bk.count && bk.lo[j] < b; ++j) {
      const double hi = j + 1 < bk.count ? bk.lo[j + 1] : end;
      const double overlap = std::min(b, hi) - std::max(a, bk.lo[j]);
      if (overlap > 0.0) sum += factor * bk.value[j] * overlap;
    }
    return sum;
  }
  const Inner& n = inners_[node];
  for (int i = 0; i < n.count; ++i) {
    const double lo = n.key[i];
    const double hi = i + 1 < n.count ? n.key[i + 1] : end;
    if (hi <= a) continue;
    if (lo >= b) break;
    if (a <= lo && hi <= b) {
      sum += factor * n.mass[i];
    } else {
      sum += range_mass(level - 1, n.child[i], hi, a, b, factor * n.tag[i]);
    }
  }
  return sum;
}

double WeightTree::range_min(std::size_t level, Index node, double end, double a, double b,
                             double factor) const {
  double best = std::numeric_limits<double>::infinity();
  if (level == 0) {
    const Bucket& bk = buckets_[node];
    for (int j = 0; j < bk.count && bk.lo[j] < b; ++j) {
      const double hi = j + 1 < bk.count ? bk.lo[j + 1] : end;
      if (std::min(b, hi) > std::max(a, bk.lo[j])) best = std::min(best, factor * bk.value[j]);
    }
    return best;
  }
  const Inner& n = inners_[node];
  for (int i = 0; i < n.count; ++i) {
    const double lo = n.key[i];
    const double hi = i + 1 < n.count ? n.key[i + 1] : end;
    if (hi <= a) continue;
    if (lo >= b) break;
    if (a <= lo && hi <= b) {
      best = std::min(best, factor * n.minv[i]);
    } else {
      best = std::min(best, range_min(level - 1, n.child[i], hi, a, b, factor * n.tag[i]));
    }
  }
  return best;
}

void WeightTree::update(double a, double b, double factor) {
  check_factor(factor);
  check_range(a, b);
  if (a == b) return;
  cut_at(a);
  cut_at(b);
  const double smallest = range_min(levels_, root_, domain_.hi, a, b, 1.0);
  apply_range(levels_, root_, domain_.hi, a, b, effective_factor(factor, smallest));
  renormalize_if_needed();
}

double WeightTree::total() const noexcept { return node_mass(levels_, root_, domain_.hi); }

double WeightTree::min_value() const noexcept { return node_min(levels_, root_); }

void WeightTree::renormalize_if_needed() {
  const double mass = total();
  if (mass < kRenormalizeBelow) scale(domain_.width() / mass);
}

void WeightTree::scale(double c) {
  check_factor(c);
  scale_node(levels_, root_, c);
}

double WeightTree::integrate(double a, double b) const {
  check_range(a, b);
  if (a == b) return 0.0;
  return range_mass(levels_, root_, domain_.hi, a, b, 1.0);
}

Piece WeightTree::sample_piece(double u) const {
  double target = u * total();
  double factor = 1.0;
  double end = domain_.hi;
  Index node = root_;
  for (std::size_t level = levels_; level > 0; --level) {
    const Inner& n = inners_[node];
    int i = 0;
    for (; i + 1 < n.count; ++i) {
      const double m = factor * n.mass[i];
      if (target < m) break;
      target -= m;
    }
    if (i + 1 < n.count) end = n.key[i + 1];
    factor *= n.tag[i];
    node = n.child[i];
  }
  const Bucket& b = buckets_[node];
  for (int j = 0;; ++j) {
    const double hi = j + 1 < b.count ? b.lo[j + 1] : end;
    const double m = factor * b.value[j] * (hi - b.lo[j]);
    if (target < m || j + 1 == b.count) return Piece{b.lo[j], hi, factor * b.value[j]};
    target -= m;
  }
}

double WeightTree::draw(Rng& rng) const {
  const Piece piece = sample_piece(rng.uniform());
  return point_in(piece, rng.uniform());
}

std::vector<Piece> WeightTree::pieces() const {
  std::vector<Piece> out;
  out.reserve(piece_count_);
  const auto walk = [&](const auto& self, std::size_t level, Index node, double end,
                        double factor) -> void {
    if (level == 0) {
      const Bucket& b = buckets_[node];
      for (int j = 0; j < b.count; ++j) {
        const double hi = j + 1 < b.count ? b.lo[j + 1] : end;
        out.push_back(Piece{b.lo[j], hi, factor * b.value[j]});
      }
      return;
    }
    const Inner& n = inners_[node];
    for (int i = 0; i < n.count; ++i) {
      const double hi = i + 1 < n.count ? n.key[i + 1] : end;
      self(self, level - 1, n.child[i], hi, factor * n.tag[i]);
    }
  };
  walk(walk, levels_, root_, domain_.hi, 1.0);
  return out;
}

void WeightTree::check_range(double a, double b) const { check_range_in(domain_, a, b); }

// ---------------------------------------------------------------------------
// FlatWeights

FlatWeights::FlatWeights(const ParamInterval& domain) : domain_(domain) {
  check_domain(domain);
  pieces_.push_back(Piece{domain.lo, domain.hi, 1.0});
}

void FlatWeights::check_range(double a, double b) const { check_range_in(domain_, a, b); }

// Index of the first piece starting at x, cutting a piece if needed.
std::size_t FlatWeights::split_at(double x) {
  auto it = std::lower_bound(pieces_.begin(), pieces_.end(), x,
                             [](const Piece& p, double v) { return p.hi <= v; });
  if (it == pieces_.end()) return pieces_.size();
  if (it->lo >= x) return static_cast<std::size_t>(it - pieces_.begin());
  const Piece tail{x, it->hi, it->value};
  it->hi = x;
  const auto pos = static_cast<std::size_t>(it - pieces_.begin()) + 1;
  pieces_.insert(pieces_.begin() + static_cast<std::ptrdiff_t>(pos), tail);
  return pos;
}

void FlatWeights::update(double a, double b, double factor) {
  check_factor(factor);
  check_range(a, b);
  if (a == b) return;
  const std::size_t first = split_at(a);
  const std::size_t last = split_at(b);
  double smallest = pieces_[first].value;
  for (std::size_t i = first; i < last; ++i) smallest = std::min(smallest, pieces_[i].value);
  const double eff = effective_factor(factor, smallest);
  for (std::size_t i = first; i < last; ++i) pieces_[i].value *= eff;
  const double mass = total();
  if (mass < kRenormalizeBelow) scale(domain_.width() / mass);
}

double FlatWeights::integrate(double a, double b) const {
  check_range(a, b);
  double sum = 0.0;
  for (const Piece& p : pieces_) {
    const double overlap = std::min(b, p.hi) - std::max(a, p.lo);
    if (overlap > 0.0) sum += p.value * overlap;
  }
  return sum;
}

double FlatWeights::total() const noexcept {
  double sum = 0.0;
  for (const Piece& p : pieces_) sum += p.mass();
  return sum;
}

double FlatWeights::min_value() const noexcept {
  double smallest = pieces_.front().value;
  for (const Piece& p : pieces_) smallest = std::min(smallest, p.value);
  return smallest;
}

Piece FlatWeights::sample_piece(double u) const {
  double target = u * total();
  for (const Piece& p : pieces_) {
    const double m = p.mass();
    if (target < m) return p;
    target -= m;
  }
  return pieces_.back();
}

double FlatWeights::draw(Rng& rng) const {
  const Piece piece = sample_piece(rng.uniform());
  return point_in(piece, rng.uniform());
}

void FlatWeights::scale(double c) {
  check_factor(c);
  for (Piece& p : pieces_) p.value *= c;
}

}  // namespace pwlopt
