// Copyright 2026 The pwlopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "pwlopt/knapsack.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace pwlopt::knapsack {

namespace {

void check_rho(double rho, double range) {
  if (!(range > 0.0)) throw std::invalid_argument("knapsack parameter range must be positive");
  if (!(rho >= 0.0 && rho <= range)) {
    throw std::out_of_range("rho = " + std::to_string(rho) + " outside [0, " +
                            std::to_string(range) + "]");
  }
}

double log_score(const Instance& inst, std::size_t i, double rho) {
  const double v = inst.values[i];
  if (v <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(v) - rho * std::log(inst.sizes[i]);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (trim(text.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("line " + std::to_string(line) + ": not a number: '" + text + "'");
}

}  // namespace

void Instance::validate() const {
  if (values.empty()) throw std::invalid_argument("knapsack instance needs at least one item");
  if (values.size() != sizes.size()) throw std::invalid_argument("values and sizes differ in length");
  if (!(capacity >= 1.0) || !std::isfinite(capacity)) {
    throw std::invalid_argument("capacity must be finite and at least 1");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0 && values[i] <= 1.0)) {
      throw std::invalid_argument("item " + std::to_string(i) + " value outside [0, 1]");
    }
    if (!(sizes[i] >= 1.0 && sizes[i] <= capacity)) {
      throw std::invalid_argument("item " + std::to_string(i) + " size outside [1, C]");
    }
  }
}

std::vector<std::size_t> score_order(const Instance& inst, double rho) {
  std::vector<double> score(inst.size());
  for (std::size_t i = 0; i < inst.size(); ++i) score[i] = log_score(inst, i, rho);
  std::vector<std::size_t> order(inst.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  return order;
}

std::vector<std::size_t> pack(const Instance& inst, const std::vector<std::size_t>& order) {
  std::vector<std::size_t> selected;
  double room = inst.capacity;
  for (std::size_t item : order) {
    if (inst.sizes[item] <= room) {
      selected.push_back(item);
      room -= inst.sizes[item];
    }
  }
  return selected;
}

std::optional<double> critical_value(double value_a, double size_a, double value_b,
                                     double size_b) {
  if (size_a == size_b || value_a <= 0.0 || value_b <= 0.0) return std::nullopt;
  // Canonical argument order makes the result bit-identical for (a, b) and (b, a).
  if (size_a > size_b) {
    std::swap(value_a, value_b);
    std::swap(size_a, size_b);
  }
  return std::log(value_a / value_b) / std::log(size_a / size_b);
}

Outcome greedy_with_feedback(double rho, const Instance& inst, double range) {
  check_rho(rho, range);
  Outcome out;
  out.order = score_order(inst, rho);
  out.selected = pack(inst, out.order);
  for (std::size_t item : out.selected) out.total_value += inst.values[item];

  double lo = 0.0;
  double hi = range;
  for (std::size_t k = 0; k + 1 < out.order.size(); ++k) {
    const std::size_t a = out.order[k];
    const std::size_t b = out.order[k + 1];
    const auto c = critical_value(inst.values[a], inst.sizes[a], inst.values[b], inst.sizes[b]);
    if (!c) continue;
    // At an exact tie a stays ahead to the right only when it is smaller.
    if (*c < rho || (*c == rho && inst.sizes[a] < inst.sizes[b])) {
      lo = std::max(lo, *c);
    } else {
      hi = std::min(hi, *c);
    }
  }
  out.feedback = ParamInterval::make(lo, hi, true, hi >= range || hi == rho);
  return out;
}

double loss(const Outcome& outcome, double capacity) { return capacity - outcome.total_value; }

double scaled_loss(const Outcome& outcome, double capacity) {
  return rescale_losses(FeedbackObservation{{}, loss(outcome, capacity), 0.0}, capacity).loss;
}

std::vector<double> enumerate_critical_values(const Instance& inst, double range) {
  std::vector<double> out;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    for (std::size_t j = i + 1; j < inst.size(); ++j) {
      const auto c = critical_value(inst.values[i], inst.sizes[i], inst.values[j], inst.sizes[j]);
      if (c && *c > 0.0 && *c < range) out.push_back(*c);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Partition full_information(const Instance& inst, double range) {
  const ParamSpace1D space(0.0, range);
  std::vector<double> cuts = enumerate_critical_values(inst, range);
  cuts.insert(cuts.begin(), 0.0);
  cuts.push_back(range);
  Partition cells;
  cells.reserve(cuts.size() - 1);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
    const auto selected = pack(inst, score_order(inst, mid));
    double value = 0.0;
    for (std::size_t item : selected) value += inst.values[item];
    cells.push_back(Cell{space.cell(cuts[k], cuts[k + 1]), inst.capacity - value});
  }
  return cells;
}

Instance sample_smoothed_instance(std::size_t n, double capacity, double kappa, Rng& rng,
                                  const std::vector<double>* sizes) {
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) {
    throw std::invalid_argument("kappa must be finite and >= 1 for values in [0, 1]");
  }
  if (n == 0) throw std::invalid_argument("need at least one item");
  if (sizes && sizes->size() != n) throw std::invalid_argument("size list length differs from n");
  Instance inst;
  inst.capacity = capacity;
  inst.values.resize(n);
  inst.sizes.resize(n);
  const double width = 1.0 / kappa;
  for (std::size_t i = 0; i < n; ++i) {
    const double start = rng.uniform(0.0, 1.0 - width);
    inst.values[i] = start + width * rng.uniform();
    inst.sizes[i] = sizes ? (*sizes)[i] : rng.uniform(1.0, capacity);
  }
  inst.validate();
  return inst;
}

Instance read_instance(std::istream& in) {
  Instance inst;
  std::string line;
  std::size_t line_no = 0;
  bool have_capacity = false;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected two fields");
    }
    const std::string first = trim(line.substr(0, comma));
    const std::string second = trim(line.substr(comma + 1));
    if (!have_capacity) {
      if (first != "capacity") {
        throw std::invalid_argument("line " + std::to_string(line_no) +
                                    ": expected 'capacity,<C>'");
      }
      inst.capacity = parse_number(second, line_no);
      have_capacity = true;
    } else if (!have_header) {
      if (first != "v" || second != "s") {
        throw std::invalid_argument("line " + std::to_string(line_no) + ": expected header 'v,s'");
      }
      have_header = true;
    } else {
      inst.values.push_back(parse_number(first, line_no));
      inst.sizes.push_back(parse_number(second, line_no));
    }
  }
  if (!have_header) throw std::invalid_argument("instance file is missing the capacity or header line");
  inst.validate();
  return inst;
}

Instance read_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file " + path);
  return read_instance(in);
}

void write_instance(std::ostream& out, const Instance& inst) {
  std::ostringstream buf;
  buf.precision(17);
  buf << "capacity," << inst.capacity << "\nv,s\n";
  for (std::size_t i = 0; i < inst.size(); ++i) buf << inst.values[i] << ',' << inst.sizes[i] << '\n';
  out << buf.str();
}

Environment::Environment(Options options, std::uint64_t seed) : options_(options), seed_(seed) {
  if (options.items == 0) throw std::invalid_argument("knapsack environment needs n >= 1");
  if (!(options.capacity >= 1.0)) throw std::invalid_argument("knapsack capacity must be >= 1");
  if (!(options.kappa >= 1.0)) throw std::invalid_argument("kappa must be >= 1");
  if (!(options.range > 0.0)) throw std::invalid_argument("parameter range must be positive");
  Rng rng(mix_seed(seed, ~std::uint64_t{0}));
  const double width = 1.0 / options.kappa;
  for (std::size_t i = 0; i < options.items; ++i) {
    starts_.push_back(rng.uniform(0.0, 1.0 - width));
    sizes_.push_back(rng.uniform(1.0, options.capacity));
  }
}

const Instance& Environment::instance(std::size_t round) {
  if (round != cached_round_) {
    Rng rng(mix_seed(seed_, round));
    if (options_.fresh_instances) {
      cached_ = sample_smoothed_instance(options_.items, options_.capacity, options_.kappa, rng);
    } else {
      const double width = 1.0 / options_.kappa;
      cached_.capacity = options_.capacity;
      cached_.sizes = sizes_;
      cached_.values.resize(options_.items);
      for (std::size_t i = 0; i < options_.items; ++i) {
        cached_.values[i] = starts_[i] + width * rng.uniform();
      }
    }
    cached_round_ = round;
  }
  return cached_;
}

FeedbackObservation Environment::step(double rho, std::size_t round) {
  const Outcome outcome = greedy_with_feedback(rho, instance(round), options_.range);
  const double raw = loss(outcome, options_.capacity);
  return FeedbackObservation{outcome.feedback, raw, raw};
}

std::optional<Partition> Environment::partition(std::size_t round) {
  return full_information(instance(round), options_.range);
}

}  // namespace pwlopt::knapsack
