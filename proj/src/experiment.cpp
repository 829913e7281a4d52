// Copyright 2026 The pwlopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "pwlopt/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <utility>

#include <toml.hpp>

#include "pwlopt/exp3_continuous.hpp"
#include "pwlopt/rng.hpp"

namespace pwlopt {

namespace {

std::string fmt_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::string body = trim(s);
  if (body.size() >= 2 && body.front() == '[' && body.back() == ']') {
    body = body.substr(1, body.size() - 2);
  }
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(body);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError("", "field '" + std::string(key) + "': expected a number, got '" + s + "'");
  }
  return v;
}

std::uint64_t to_uint(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("", "field '" + std::string(key) +
                              "': expected a non-negative integer, got '" + s + "'");
  }
  return v;
}

double positive(std::string_view key, double v) {
  if (!(v > 0.0)) throw ConfigError("", "field '" + std::string(key) + "' must be positive");
  return v;
}

std::size_t positive_count(std::string_view key, std::uint64_t v) {
  if (v == 0) throw ConfigError("", "field '" + std::string(key) + "' must be >= 1");
  return static_cast<std::size_t>(v);
}

bool to_bool(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("", "field '" + std::string(key) + "': expected true or false, got '" + s + "'");
}

template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(threads, count); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::size_t worker_count(const ExperimentConfig& config) {
  if (config.threads > 0) return config.threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::uint64_t environment_seed(const ExperimentConfig& config, std::uint64_t seed) {
  return mix_seed(config.master_seed, seed);
}

// Neumaier compensated sum.
struct Accumulator {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double t = sum + x;
    carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

}  // namespace

const char* to_string(EnvKind kind) noexcept {
  switch (kind) {
    case EnvKind::knapsack: return "knapsack";
    case EnvKind::clustering: return "clustering";
    case EnvKind::synthetic: return "synthetic";
  }
  return "?";
}

const char* to_string(LearnerKind kind) noexcept {
  return kind == LearnerKind::continuous ? "continuous" : "discretized";
}

void apply_setting(ExperimentConfig& c, std::string_view key_view, std::string_view value) {
  const std::string key(key_view);
  const std::string v = trim(value);
  if (key == "env") {
    if (v == "knapsack") c.env = EnvKind::knapsack;
    else if (v == "clustering") c.env = EnvKind::clustering;
    else if (v == "synthetic") c.env = EnvKind::synthetic;
    else throw ConfigError("", "field 'env': unknown environment '" + v +
                                   "' (knapsack, clustering, synthetic)");
  } else if (key == "learner") {
    if (v == "continuous") c.learner = LearnerKind::continuous;
    else if (v == "discretized") c.learner = LearnerKind::discretized;
    else throw ConfigError("", "field 'learner': unknown learner '" + v +
                                   "' (continuous, discretized)");
  } else if (key == "regime") {
    try {
      c.regime = parse_regime(v);
    } catch (const std::exception& e) {
      throw ConfigError("", "field 'regime': " + std::string(e.what()));
    }
  } else if (key == "T") {
    c.horizons.clear();
    for (const auto& item : split_list(v)) c.horizons.push_back(to_uint(key, item));
  } else if (key == "seeds") {
    c.seeds.clear();
    for (const auto& item : split_list(v)) c.seeds.push_back(to_uint(key, item));
  } else if (key == "master_seed") {
    c.master_seed = to_uint(key, v);
  } else if (key == "lambda") {
    c.lambda = to_double(key, v);
  } else if (key == "r") {
    c.r = positive(key, to_double(key, v));
  } else if (key == "lipschitz") {
    c.lipschitz = positive(key, to_double(key, v));
  } else if (key == "timing") {
    c.timing = to_bool(key, v);
  } else if (key == "threads") {
    c.threads = static_cast<std::size_t>(to_uint(key, v));
  } else if (key == "knapsack.n") {
    c.knapsack.items = positive_count(key, to_uint(key, v));
  } else if (key == "knapsack.C") {
    c.knapsack.capacity = positive(key, to_double(key, v));
  } else if (key == "knapsack.kappa") {
    c.knapsack.kappa = positive(key, to_double(key, v));
  } else if (key == "knapsack.R") {
    c.knapsack.range = positive(key, to_double(key, v));
  } else if (key == "knapsack.fresh_instances") {
    c.knapsack.fresh_instances = to_bool(key, v);
  } else if (key == "clustering.n") {
    c.clustering.points = positive_count(key, to_uint(key, v));
  } else if (key == "clustering.B") {
    c.clustering.bound = positive(key, to_double(key, v));
  } else if (key == "clustering.kappa") {
    c.clustering.kappa = positive(key, to_double(key, v));
  } else if (key == "clustering.k") {
    c.clustering.clusters = positive_count(key, to_uint(key, v));
  } else if (key == "synthetic.cells") {
    c.synthetic.cells = positive_count(key, to_uint(key, v));
  } else if (key == "synthetic.lo") {
    c.synthetic.lo = to_double(key, v);
  } else if (key == "synthetic.hi") {
    c.synthetic.hi = to_double(key, v);
  } else if (key == "synthetic.constant_loss") {
    c.synthetic.constant_loss = to_double(key, v);
  } else if (key == "dispersion.T") {
    c.dispersion.horizon = positive_count(key, to_uint(key, v));
  } else if (key == "dispersion.eps_min") {
    c.dispersion.eps_min = positive(key, to_double(key, v));
  } else if (key == "dispersion.eps_max") {
    c.dispersion.eps_max = positive(key, to_double(key, v));
  } else if (key == "dispersion.eps_count") {
    c.dispersion.eps_count = positive_count(key, to_uint(key, v));
  } else if (key == "dispersion.c") {
    c.dispersion.additive_constant = to_double(key, v);
  } else {
    throw ConfigError("", "unknown field '" + key + "'");
  }
}

void validate(const ExperimentConfig& c) {
  if (c.horizons.empty()) throw ConfigError("", "field 'T': need at least one horizon");
  if (c.seeds.empty()) throw ConfigError("", "field 'seeds': need at least one seed");
  if (std::set<std::uint64_t>(c.seeds.begin(), c.seeds.end()).size() != c.seeds.size()) {
    throw ConfigError("", "field 'seeds': seeds must be distinct");
  }
  if (c.lambda && !(*c.lambda > 0.0 && *c.lambda <= 1.0)) {
    throw ConfigError("", "field 'lambda': must lie in (0, 1]");
  }
  if (c.learner == LearnerKind::continuous && c.regime == Regime::bandit) {
    throw ConfigError("", "field 'regime': the continuous learner needs semi_bandit or "
                          "full_info feedback; use learner = \"discretized\" for bandit");
  }
  if (c.clustering.clusters > c.clustering.points) {
    throw ConfigError("", "field 'clustering.k': more clusters than points");
  }
  if (!(c.synthetic.lo < c.synthetic.hi)) {
    throw ConfigError("", "fields 'synthetic.lo', 'synthetic.hi': need lo < hi");
  }
  if (c.synthetic.constant_loss &&
      !(*c.synthetic.constant_loss >= 0.0 && *c.synthetic.constant_loss <= 1.0)) {
    throw ConfigError("", "field 'synthetic.constant_loss': must lie in [0, 1]");
  }
  if (!(c.dispersion.eps_min <= c.dispersion.eps_max)) {
    throw ConfigError("", "fields 'dispersion.eps_min', 'dispersion.eps_max': need min <= max");
  }
  const ParamSpace1D space = c.env == EnvKind::knapsack
                                 ? ParamSpace1D(0.0, c.knapsack.range)
                                 : c.env == EnvKind::clustering
                                       ? ParamSpace1D(0.0, 1.0)
                                       : ParamSpace1D(c.synthetic.lo, c.synthetic.hi);
  // The continuous step size needs ln(R / r) > 0; a net may use r = R.
  if (c.r && !(c.learner == LearnerKind::continuous ? *c.r < space.radius()
                                                   : *c.r <= space.radius())) {
    throw ConfigError("", "field 'r': must not exceed the space radius " +
                              fmt_double(space.radius()));
  }
}

ExperimentConfig parse_config(std::string_view text, std::string_view source) {
  const std::string src(source);
  toml::table root;
  try {
    root = toml::parse(text, src);
  } catch (const toml::parse_error& e) {
    const auto& at = e.source().begin;
    throw ConfigError(src + ":" + std::to_string(at.line) + ":" + std::to_string(at.column),
                      std::string(e.description()));
  }
  ExperimentConfig config;
  const auto position = [&](const toml::node& node) {
    const auto& at = node.source().begin;
    return src + ":" + std::to_string(at.line) + ":" + std::to_string(at.column);
  };
  const auto scalar = [&](const std::string& key, const toml::node& node) -> std::string {
    if (auto v = node.value_exact<std::string>()) return *v;
    if (auto v = node.value_exact<std::int64_t>()) return std::to_string(*v);
    if (auto v = node.value_exact<double>()) return fmt_double(*v);
    if (auto v = node.value_exact<bool>()) return *v ? "true" : "false";
    throw ConfigError(position(node), "field '" + key + "': unsupported value type");
  };
  const auto apply = [&](const std::string& key, const toml::node& node) {
    std::string value;
    if (const auto* arr = node.as_array()) {
      for (const auto& item : *arr) {
        if (!value.empty()) value += ",";
        value += scalar(key, item);
      }
    } else {
      value = scalar(key, node);
    }
    try {
      apply_setting(config, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(position(node), e.what());
    }
  };
  for (const auto& [k, node] : root) {
    const std::string key(k.str());
    if (const auto* table = node.as_table()) {
      for (const auto& [k2, inner] : *table) {
        if (inner.is_table()) {
          throw ConfigError(position(inner), "field '" + key + "." + std::string(k2.str()) +
                                                 "': nesting deeper than one table");
        }
        apply(key + "." + std::string(k2.str()), inner);
      }
    } else {
      apply(key, node);
    }
  }
  try {
    validate(config);
  } catch (const ConfigError& e) {
    throw ConfigError(src, e.what());
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path);
}

std::unique_ptr<SemiBanditEnvironment> make_environment(const ExperimentConfig& config,
                                                        std::uint64_t seed) {
  switch (config.env) {
    case EnvKind::knapsack:
      return std::make_unique<knapsack::Environment>(config.knapsack, seed);
    case EnvKind::clustering:
      return std::make_unique<clustering::Environment>(config.clustering, seed);
    case EnvKind::synthetic:
      return std::make_unique<SyntheticEnvironment>(config.synthetic, seed);
  }
  throw std::invalid_argument("unknown environment kind");
}

void HindsightAccumulator::add(const Partition& cells) {
  if (cells.empty()) {
    throw std::invalid_argument("round " + std::to_string(rounds_) +
                                " lacks boundary information");
  }
  check_partition(cells, space_);
  base_ += cells.front().loss;
  for (std::size_t k = 1; k < cells.size(); ++k) {
    events_.emplace_back(cells[k].set.lo, cells[k].loss - cells[k - 1].loss);
  }
  ++rounds_;
}

HindsightOptimum HindsightAccumulator::best() const {
  auto events = events_;
  std::sort(events.begin(), events.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  Accumulator running;
  running.add(base_);
  double best_total = running.value();
  double best_lo = space_.lo();
  double best_hi = events.empty() ? space_.hi() : events.front().first;
  std::size_t i = 0;
  while (i < events.size()) {
    const double x = events[i].first;
    while (i < events.size() && events[i].first == x) running.add(events[i++].second);
    const double next = i < events.size() ? events[i].first : space_.hi();
    const double total = running.value();
    if (total < best_total) {
      best_total = total;
      best_lo = x;
      best_hi = next;
    }
  }
  return HindsightOptimum{best_lo + 0.5 * (best_hi - best_lo), best_total, false};
}

HindsightOptimum best_in_hindsight(std::span<const Partition> rounds, const ParamSpace1D& space) {
  HindsightAccumulator acc(space);
  for (const Partition& p : rounds) acc.add(p);
  return acc.best();
}

HindsightOptimum grid_best_in_hindsight(SemiBanditEnvironment& env, std::size_t horizon,
                                        std::size_t points) {
  if (points == 0) throw std::invalid_argument("grid needs at least one point");
  const ParamSpace1D space = env.space();
  std::vector<double> totals(points, 0.0);
  const double step = space.width() / static_cast<double>(points);
  for (std::size_t t = 0; t < horizon; ++t) {
    for (std::size_t j = 0; j < points; ++j) {
      totals[j] += env.step(space.lo() + (static_cast<double>(j) + 0.5) * step, t).loss;
    }
  }
  const auto it = std::min_element(totals.begin(), totals.end());
  const auto j = static_cast<std::size_t>(it - totals.begin());
  return HindsightOptimum{space.lo() + (static_cast<double>(j) + 0.5) * step, *it, true};
}

namespace {

struct HorizonSummary {
  HindsightOptimum opt;
  std::size_t max_cells = 1;
};

// Best-in-hindsight at every requested horizon of one seed, in one pass.
std::vector<HorizonSummary> summarize_seed(const ExperimentConfig& config,
                                           const std::vector<std::size_t>& horizons,
                                           std::uint64_t env_seed) {
  auto env = make_environment(config, env_seed);
  RescaledEnvironment scaled(*env);
  const ParamSpace1D space = scaled.space();
  std::vector<HorizonSummary> out(horizons.size());
  const std::size_t longest = horizons.back();
  if (longest == 0) {
    for (auto& s : out) s.opt = HindsightOptimum{space.interval().midpoint(), 0.0, false};
    return out;
  }
  std::optional<Partition> first = scaled.partition(0);
  if (!first) {
    for (std::size_t k = 0; k < horizons.size(); ++k) {
      out[k].opt = horizons[k] == 0 ? HindsightOptimum{space.interval().midpoint(), 0.0, true}
                                    : grid_best_in_hindsight(scaled, horizons[k]);
    }
    return out;
  }
  HindsightAccumulator acc(space);
  std::size_t max_cells = 1;
  std::size_t k = 0;
  while (k < horizons.size() && horizons[k] == 0) {
    out[k++].opt = HindsightOptimum{space.interval().midpoint(), 0.0, false};
  }
  for (std::size_t t = 0; t < longest; ++t) {
    std::optional<Partition> cells = t == 0 ? std::move(first) : scaled.partition(t);
    if (!cells) throw std::invalid_argument("round " + std::to_string(t) +
                                            " lacks boundary information");
    max_cells = std::max(max_cells, cells->size());
    acc.add(*cells);
    while (k < horizons.size() && horizons[k] == t + 1) {
      out[k].opt = acc.best();
      out[k].max_cells = max_cells;
      ++k;
    }
  }
  return out;
}

struct LearnerSettings {
  double lambda = 0.0;
  double r = 0.0;
};

LearnerSettings learner_settings(const ExperimentConfig& config, const ParamSpace1D& space,
                                 std::size_t horizon, std::size_t cells) {
  const auto t = static_cast<long long>(std::max<std::size_t>(horizon, 1));
  const auto m = static_cast<long long>(std::max<std::size_t>(cells, 1));
  LearnerSettings s;
  if (config.learner == LearnerKind::continuous) {
    s.r = config.r.value_or(std::min(1.0 / std::sqrt(static_cast<double>(t)), 0.5 * space.radius()));
    s.lambda = config.lambda.value_or(
        recommended_lambda(1, space.radius(), s.r, t, config.regime == Regime::semi_bandit ? m : 1));
    return s;
  }
  const DiscretizedParams p =
      recommended_params(config.regime, 1, space.radius(), config.lipschitz, t, m);
  s.r = config.r.value_or(std::min(p.r, 0.5 * space.radius()));
  s.lambda = config.lambda.value_or(p.lambda);
  return s;
}

struct GameOutput {
  double learner_loss = 0.0;
  double seconds = 0.0;
  std::string trace;
};

void trace_row(std::string& out, std::uint64_t seed, std::size_t horizon, std::size_t t,
               double rho, double loss) {
  out += std::to_string(seed) + "," + std::to_string(horizon) + "," + std::to_string(t) + "," +
         fmt_double(rho) + "," + fmt_double(loss) + "\n";
}

GameOutput play(const ExperimentConfig& config, std::uint64_t seed, std::size_t horizon,
                const LearnerSettings& settings, bool with_trace) {
  const std::uint64_t env_seed = environment_seed(config, seed);
  auto env = make_environment(config, env_seed);
  RescaledEnvironment scaled(*env);
  const ParamSpace1D space = scaled.space();
  Rng rng(mix_seed(env_seed, 0x9e3779b97f4a7c15ULL + horizon));
  GameOutput out;
  const auto start = std::chrono::steady_clock::now();
  const auto all_cells = [&](std::size_t t) {
    auto cells = scaled.partition(t);
    if (!cells) throw std::invalid_argument("full information needs the environment's cells");
    return std::move(*cells);
  };
  if (config.learner == LearnerKind::continuous) {
    TreeExp3Set learner(space, settings.lambda);
    for (std::size_t t = 0; t < horizon; ++t) {
      const double rho = learner.sample(rng);
      const FeedbackObservation obs = scaled.step(rho, t);
      if (config.regime == Regime::full_info) {
        learner.observe_full(all_cells(t), obs.loss_at_play);
      } else {
        learner.observe(rho, obs);
      }
      if (with_trace) trace_row(out.trace, seed, horizon, t, rho, obs.loss_at_play);
    }
    out.learner_loss = learner.cumulative_loss();
  } else if (horizon > 0) {
    const RNet net = build_rnet(space, settings.r);
    TreeDiscreteExp3Set learner(net.size(), settings.lambda);
    std::vector<ArmRange> ranges;
    for (std::size_t t = 0; t < horizon; ++t) {
      const std::size_t arm = learner.sample(rng);
      const double rho = net.point1d(arm);
      const FeedbackObservation obs = scaled.step(rho, t);
      switch (config.regime) {
        case Regime::bandit:
          learner.observe_arm(arm, obs.loss_at_play);
          break;
        case Regime::semi_bandit: {
          const ArmRange range = arms_in(net, obs.set, obs.loss);
          learner.observe(std::span<const ArmRange>(&range, 1), obs.loss_at_play);
          break;
        }
        case Regime::full_info: {
          ranges.clear();
          for (const Cell& cell : all_cells(t)) {
            const ArmRange range = arms_in(net, cell.set, cell.loss);
            if (range.first < range.last) ranges.push_back(range);
          }
          learner.observe(ranges, obs.loss_at_play);
          break;
        }
      }
      if (with_trace) trace_row(out.trace, seed, horizon, t, rho, obs.loss_at_play);
    }
    out.learner_loss = learner.cumulative_loss();
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, bool with_trace) {
  validate(config);
  const std::size_t workers = worker_count(config);
  std::vector<std::size_t> horizons = config.horizons;
  std::sort(horizons.begin(), horizons.end());
  horizons.erase(std::unique(horizons.begin(), horizons.end()), horizons.end());

  std::vector<std::vector<HorizonSummary>> summaries(config.seeds.size());
  parallel_for(config.seeds.size(), workers, [&](std::size_t i) {
    summaries[i] = summarize_seed(config, horizons, environment_seed(config, config.seeds[i]));
  });

  const auto probe = make_environment(config, environment_seed(config, config.seeds.front()));
  const ParamSpace1D space = probe->space();
  ExperimentResult result;
  result.notes.push_back(std::string("env=") + to_string(config.env) +
                         " learner=" + to_string(config.learner) +
                         " regime=" + to_string(config.regime) +
                         " master_seed=" + std::to_string(config.master_seed));
  result.notes.push_back("losses scaled to [0,1] by loss bound H=" +
                         fmt_double(probe->loss_bound()));
  bool grid = false;
  std::vector<LearnerSettings> settings(horizons.size());
  for (std::size_t k = 0; k < horizons.size(); ++k) {
    std::size_t cells = 1;
    for (const auto& s : summaries) {
      cells = std::max(cells, s[k].max_cells);
      grid = grid || s[k].opt.grid_fallback;
    }
    settings[k] = learner_settings(config, space, horizons[k], cells);
    result.notes.push_back("T=" + std::to_string(horizons[k]) +
                           " lambda=" + fmt_double(settings[k].lambda) +
                           " r=" + fmt_double(settings[k].r) + " M=" + std::to_string(cells) +
                           (config.lambda ? " (lambda override)" : ""));
  }
  result.notes.push_back(grid ? "best_in_hindsight=grid(100000 points)"
                              : "best_in_hindsight=exact");

  struct Job {
    std::size_t seed_index;
    std::size_t horizon_index;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < config.seeds.size(); ++i) {
    for (std::size_t k = 0; k < horizons.size(); ++k) jobs.push_back({i, k});
  }
  std::vector<RegretRecord> records(jobs.size());
  std::vector<std::string> traces(jobs.size());
  parallel_for(jobs.size(), workers, [&](std::size_t j) {
    const Job& job = jobs[j];
    const std::uint64_t seed = config.seeds[job.seed_index];
    const std::size_t horizon = horizons[job.horizon_index];
    GameOutput game = play(config, seed, horizon, settings[job.horizon_index], with_trace);
    const HindsightOptimum& opt = summaries[job.seed_index][job.horizon_index].opt;
    RegretRecord& rec = records[j];
    rec.seed = seed;
    rec.horizon = horizon;
    rec.learner_loss = game.learner_loss;
    rec.opt_loss = opt.total_loss;
    rec.regret = game.learner_loss - opt.total_loss;
    rec.us_per_round = config.timing && horizon > 0
                           ? 1e6 * game.seconds / static_cast<double>(horizon)
                           : 0.0;
    traces[j] = std::move(game.trace);
  });

  std::vector<std::size_t> order(jobs.size());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::pair(records[a].seed, records[a].horizon) <
           std::pair(records[b].seed, records[b].horizon);
  });
  for (std::size_t j : order) {
    result.records.push_back(records[j]);
    result.trace += traces[j];
  }
  if (with_trace) result.trace = "seed,T,round,rho,loss\n" + result.trace;
  return result;
}

std::string to_csv(const ExperimentResult& result) {
  std::string out;
  for (const auto& note : result.notes) out += "# " + note + "\n";
  out += "seed,T,learner_loss,opt_loss,regret,us_per_round\n";
  for (const auto& r : result.records) {
    out += std::to_string(r.seed) + "," + std::to_string(r.horizon) + "," +
           fmt_double(r.learner_loss) + "," + fmt_double(r.opt_loss) + "," +
           fmt_double(r.regret) + "," + fmt_double(r.us_per_round) + "\n";
  }
  return out;
}

DispersionResult run_dispersion(const ExperimentConfig& config) {
  validate(config);
  if (config.env == EnvKind::synthetic) {
    throw ConfigError("", "field 'env': dispersion bounds exist for knapsack and clustering only");
  }
  const DispersionSettings& d = config.dispersion;
  std::vector<dispersion::DiscontinuityProfile> profiles(config.seeds.size());
  parallel_for(config.seeds.size(), worker_count(config), [&](std::size_t i) {
    auto env = make_environment(config, environment_seed(config, config.seeds[i]));
    profiles[i] = dispersion::collect_discontinuities(*env, d.horizon);
  });
  const double horizon = static_cast<double>(d.horizon);
  const auto bounds = [&](double eps, double c) {
    if (config.env == EnvKind::knapsack) {
      const auto& k = config.knapsack;
      const double b = dispersion::knapsack_bound(horizon, eps, static_cast<double>(k.items),
                                                  k.kappa, k.capacity, c);
      return dispersion::ClusteringBound{b, b};
    }
    const auto& k = config.clustering;
    return dispersion::clustering_bound(horizon, eps, static_cast<double>(k.points), k.kappa,
                                        k.bound, k.bound, c);
  };
  DispersionResult result;
  std::vector<dispersion::DispersionRow> bare;
  for (double eps : dispersion::log_spaced(d.eps_min, d.eps_max, d.eps_count)) {
    const dispersion::SeedAverage avg = dispersion::seed_average(profiles, eps);
    const auto with_c = bounds(eps, d.additive_constant);
    const auto without = bounds(eps, 0.0);
    result.rows.push_back({eps, avg.mean, avg.stderr_of_mean, with_c.statement, with_c.proof});
    bare.push_back({eps, avg.mean, avg.stderr_of_mean, without.statement, without.proof});
  }
  const double items = config.env == EnvKind::knapsack
                           ? static_cast<double>(config.knapsack.items)
                           : static_cast<double>(config.clustering.points);
  result.fitted_constant = dispersion::fitted_additive_constant(bare, horizon, items);
  result.notes.push_back(std::string("env=") + to_string(config.env) +
                         " T=" + std::to_string(d.horizon) +
                         " seeds=" + std::to_string(config.seeds.size()) +
                         " master_seed=" + std::to_string(config.master_seed));
  result.notes.push_back("additive_constant=" + fmt_double(d.additive_constant) +
                         " fitted_additive_constant=" + fmt_double(result.fitted_constant));
  return result;
}

std::string to_csv(const DispersionResult& result) {
  std::string out;
  for (const auto& note : result.notes) out += "# " + note + "\n";
  return out + dispersion::to_csv(result.rows);
}

}  // namespace pwlopt
