// Copyright 2026 The pwlopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "pwlopt/pwl.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "pwlopt/blackbox_feedback.hpp"
#include "pwlopt/clustering.hpp"
#include "pwlopt/dispersion.hpp"
#include "pwlopt/exp3_continuous.hpp"
#include "pwlopt/exp3_discretized.hpp"
#include "pwlopt/experiment.hpp"
#include "pwlopt/knapsack.hpp"
#include "pwlopt/weight_tree.hpp"

struct pwl_rng {
  pwlopt::Rng rng;
};
struct pwl_weights {
  std::variant<pwlopt::WeightTree, pwlopt::FlatWeights> w;
};
struct pwl_exp3 {
  std::variant<pwlopt::TreeExp3Set, pwlopt::NaiveExp3Set> learner;
};
struct pwl_discrete_exp3 {
  std::variant<pwlopt::TreeDiscreteExp3Set, pwlopt::LinearDiscreteExp3Set> learner;
};
struct pwl_knapsack {
  pwlopt::knapsack::Instance inst;
};
struct pwl_distances {
  pwlopt::clustering::DistanceMatrix d;
};
struct pwl_config {
  pwlopt::ExperimentConfig config;
};

namespace {

thread_local std::string last_error;

pwl_status fail(pwl_status status, const char* message) {
  last_error = message;
  return status;
}

// Runs fn, translating exceptions. Inside loaders a std::invalid_argument is
// a malformed file and maps to PWL_ERR_PARSE.
template <class Fn>
pwl_status guard(Fn&& fn, bool parsing = false) {
  try {
    fn();
    return PWL_OK;
  } catch (const pwlopt::ConfigError& e) {
    return fail(PWL_ERR_PARSE, e.what());
  } catch (const std::out_of_range& e) {
    return fail(PWL_ERR_OUT_OF_RANGE, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(parsing ? PWL_ERR_PARSE : PWL_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::domain_error& e) {
    return fail(PWL_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::runtime_error& e) {
    return fail(PWL_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PWL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PWL_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PWL_ERR_INTERNAL, "unknown error");
  }
}

#define PWL_REQUIRE(ptr)                                                      \
  do {                                                                        \
    if ((ptr) == nullptr) return fail(PWL_ERR_INVALID_ARGUMENT, #ptr " is null"); \
  } while (0)

pwlopt::ParamInterval from_c(const pwl_interval& s) {
  return pwlopt::ParamInterval::make(s.lo, s.hi, s.lo_closed != 0, s.hi_closed != 0);
}

pwl_interval to_c(const pwlopt::ParamInterval& s) {
  return pwl_interval{s.lo, s.hi, s.lo_closed ? 1 : 0, s.hi_closed ? 1 : 0};
}

pwlopt::Regime from_c(pwl_regime r) {
  switch (r) {
    case PWL_FULL_INFO: return pwlopt::Regime::full_info;
    case PWL_SEMI_BANDIT: return pwlopt::Regime::semi_bandit;
    case PWL_BANDIT: return pwlopt::Regime::bandit;
  }
  throw std::invalid_argument("unknown regime");
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

pwlopt::clustering::ClusterTree tree_from_c(size_t leaves, const pwl_merge* merges) {
  pwlopt::clustering::ClusterTree tree;
  tree.leaves = leaves;
  for (size_t k = 0; k + 1 < leaves; ++k) {
    const size_t limit = leaves + k;
    if (merges[k].left >= limit || merges[k].right >= limit || merges[k].left == merges[k].right) {
      throw std::out_of_range("merge " + std::to_string(k) + " refers to a node not yet built");
    }
    tree.merges.emplace_back(merges[k].left, merges[k].right);
  }
  return tree;
}

}  // namespace

extern "C" {

const char* pwl_last_error(void) { return last_error.c_str(); }

const char* pwl_status_name(pwl_status status) {
  switch (status) {
    case PWL_OK: return "ok";
    case PWL_ERR_INVALID_ARGUMENT: return "invalid argument";
    case PWL_ERR_OUT_OF_RANGE: return "out of range";
    case PWL_ERR_PARSE: return "parse error";
    case PWL_ERR_IO: return "i/o error";
    case PWL_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* pwl_version(void) { return "0.1.0"; }

void pwl_string_free(char* text) { std::free(text); }

pwl_status pwl_rng_create(uint64_t seed, pwl_rng** out) {
  PWL_REQUIRE(out);
  return guard([&] { *out = new pwl_rng{pwlopt::Rng(seed)}; });
}

void pwl_rng_destroy(pwl_rng* rng) { delete rng; }

double pwl_rng_uniform(pwl_rng* rng) { return rng == nullptr ? 0.0 : rng->rng.uniform(); }

uint64_t pwl_mix_seed(uint64_t master, uint64_t index) { return pwlopt::mix_seed(master, index); }

pwl_status pwl_weights_create(double lo, double hi, pwl_backend backend, pwl_weights** out) {
  PWL_REQUIRE(out);
  return guard([&] {
    const auto domain = pwlopt::ParamInterval::closed(lo, hi);
    if (backend == PWL_BACKEND_TREE) {
      *out = new pwl_weights{pwlopt::WeightTree(domain)};
    } else if (backend == PWL_BACKEND_FLAT) {
      *out = new pwl_weights{pwlopt::FlatWeights(domain)};
    } else {
      throw std::invalid_argument("unknown weight backend");
    }
  });
}

void pwl_weights_destroy(pwl_weights* w) { delete w; }

pwl_status pwl_weights_update(pwl_weights* w, double a, double b, double factor) {
  PWL_REQUIRE(w);
  return guard([&] { std::visit([&](auto& x) { x.update(a, b, factor); }, w->w); });
}

pwl_status pwl_weights_integrate(const pwl_weights* w, double a, double b, double* out) {
  PWL_REQUIRE(w);
  PWL_REQUIRE(out);
  return guard([&] { *out = std::visit([&](const auto& x) { return x.integrate(a, b); }, w->w); });
}

pwl_status pwl_weights_total(const pwl_weights* w, double* out) {
  PWL_REQUIRE(w);
  PWL_REQUIRE(out);
  return guard([&] { *out = std::visit([](const auto& x) { return x.total(); }, w->w); });
}

pwl_status pwl_weights_draw(const pwl_weights* w, pwl_rng* rng, double* out) {
  PWL_REQUIRE(w);
  PWL_REQUIRE(rng);
  PWL_REQUIRE(out);
  return guard([&] { *out = std::visit([&](const auto& x) { return x.draw(rng->rng); }, w->w); });
}

pwl_status pwl_weights_piece_count(const pwl_weights* w, size_t* out) {
  PWL_REQUIRE(w);
  PWL_REQUIRE(out);
  return guard([&] { *out = std::visit([](const auto& x) { return x.piece_count(); }, w->w); });
}

pwl_status pwl_exp3_create(double lo, double hi, double lambda, pwl_backend backend,
                           pwl_exp3** out) {
  PWL_REQUIRE(out);
  return guard([&] {
    const pwlopt::ParamSpace1D space(lo, hi);
    if (backend == PWL_BACKEND_TREE) {
      *out = new pwl_exp3{pwlopt::TreeExp3Set(space, lambda)};
    } else if (backend == PWL_BACKEND_FLAT) {
      *out = new pwl_exp3{pwlopt::NaiveExp3Set(space, lambda)};
    } else {
      throw std::invalid_argument("unknown weight backend");
    }
  });
}

void pwl_exp3_destroy(pwl_exp3* learner) { delete learner; }

pwl_status pwl_exp3_sample(const pwl_exp3* learner, pwl_rng* rng, double* rho) {
  PWL_REQUIRE(learner);
  PWL_REQUIRE(rng);
  PWL_REQUIRE(rho);
  return guard([&] {
    *rho = std::visit([&](const auto& l) { return l.sample(rng->rng); }, learner->learner);
  });
}

pwl_status pwl_exp3_probability(const pwl_exp3* learner, pwl_interval set, double* out) {
  PWL_REQUIRE(learner);
  PWL_REQUIRE(out);
  return guard([&] {
    const auto s = from_c(set);
    *out = std::visit([&](const auto& l) { return l.probability(s); }, learner->learner);
  });
}

pwl_status pwl_exp3_observe(pwl_exp3* learner, double played, pwl_interval set, double loss,
                            double* estimate) {
  PWL_REQUIRE(learner);
  return guard([&] {
    const pwlopt::FeedbackObservation obs{from_c(set), loss, loss};
    const auto e = std::visit([&](auto& l) { return l.observe(played, obs); }, learner->learner);
    if (estimate != nullptr) *estimate = e.value;
  });
}

pwl_status pwl_exp3_cumulative_loss(const pwl_exp3* learner, double* out) {
  PWL_REQUIRE(learner);
  PWL_REQUIRE(out);
  *out = std::visit([](const auto& l) { return l.cumulative_loss(); }, learner->learner);
  return PWL_OK;
}

pwl_status pwl_recommended_lambda(int dim, double radius, double r, long long horizon,
                                  long long cells, double* out) {
  PWL_REQUIRE(out);
  return guard([&] { *out = pwlopt::recommended_lambda(dim, radius, r, horizon, cells); });
}

pwl_status pwl_recommended_params(pwl_regime regime, int dim, double radius, double lipschitz,
                                  long long horizon, long long cells, double* r,
                                  double* lambda) {
  PWL_REQUIRE(r);
  PWL_REQUIRE(lambda);
  return guard([&] {
    const auto p =
        pwlopt::recommended_params(from_c(regime), dim, radius, lipschitz, horizon, cells);
    *r = p.r;
    *lambda = p.lambda;
  });
}

pwl_status pwl_rnet(double lo, double hi, double r, int dim, double* points, size_t capacity,
                    size_t* count) {
  PWL_REQUIRE(count);
  return guard([&] {
    const auto net = pwlopt::build_rnet(pwlopt::ParamSpace1D(lo, hi), r, dim);
    *count = net.size();
    if (points == nullptr) return;
    if (capacity < net.coords.size()) {
      throw std::out_of_range("output buffer holds " + std::to_string(capacity) +
                              " values, net needs " + std::to_string(net.coords.size()));
    }
    std::copy(net.coords.begin(), net.coords.end(), points);
  });
}

pwl_status pwl_discrete_exp3_create(size_t arms, double lambda, pwl_backend backend,
                                    pwl_discrete_exp3** out) {
  PWL_REQUIRE(out);
  return guard([&] {
    if (backend == PWL_BACKEND_TREE) {
      *out = new pwl_discrete_exp3{pwlopt::TreeDiscreteExp3Set(arms, lambda)};
    } else if (backend == PWL_BACKEND_FLAT) {
      *out = new pwl_discrete_exp3{pwlopt::LinearDiscreteExp3Set(arms, lambda)};
    } else {
      throw std::invalid_argument("unknown weight backend");
    }
  });
}

void pwl_discrete_exp3_destroy(pwl_discrete_exp3* learner) { delete learner; }

pwl_status pwl_discrete_exp3_sample(const pwl_discrete_exp3* learner, pwl_rng* rng,
                                    size_t* arm) {
  PWL_REQUIRE(learner);
  PWL_REQUIRE(rng);
  PWL_REQUIRE(arm);
  return guard([&] {
    *arm = std::visit([&](const auto& l) { return l.sample(rng->rng); }, learner->learner);
  });
}

pwl_status pwl_discrete_exp3_probability(const pwl_discrete_exp3* learner, size_t arm,
                                         double* out) {
  PWL_REQUIRE(learner);
  PWL_REQUIRE(out);
  return guard([&] {
    *out = std::visit(
        [&](const auto& l) {
          if (arm >= l.arms()) throw std::out_of_range("arm index out of range");
          return l.probability(arm);
        },
        learner->learner);
  });
}

pwl_status pwl_discrete_exp3_observe(pwl_discrete_exp3* learner, const pwl_arm_range* ranges,
                                     size_t count, double loss_at_play,
                                     double* observed_probability) {
  PWL_REQUIRE(learner);
  PWL_REQUIRE(ranges);
  return guard([&] {
    std::vector<pwlopt::ArmRange> rs;
    for (size_t i = 0; i < count; ++i) rs.push_back({ranges[i].first, ranges[i].last, ranges[i].loss});
    const double q =
        std::visit([&](auto& l) { return l.observe(rs, loss_at_play); }, learner->learner);
    if (observed_probability != nullptr) *observed_probability = q;
  });
}

pwl_status pwl_knapsack_create(const double* values, const double* sizes, size_t n,
                               double capacity, pwl_knapsack** out) {
  PWL_REQUIRE(out);
  if (n > 0) {
    PWL_REQUIRE(values);
    PWL_REQUIRE(sizes);
  }
  return guard([&] {
    pwlopt::knapsack::Instance inst{{values, values + n}, {sizes, sizes + n}, capacity};
    inst.validate();
    *out = new pwl_knapsack{std::move(inst)};
  });
}

pwl_status pwl_knapsack_load(const char* path, pwl_knapsack** out) {
  PWL_REQUIRE(path);
  PWL_REQUIRE(out);
  return guard([&] { *out = new pwl_knapsack{pwlopt::knapsack::read_instance_file(path)}; },
               true);
}

void pwl_knapsack_destroy(pwl_knapsack* inst) { delete inst; }

size_t pwl_knapsack_size(const pwl_knapsack* inst) { return inst ? inst->inst.size() : 0; }

double pwl_knapsack_capacity(const pwl_knapsack* inst) { return inst ? inst->inst.capacity : 0.0; }

pwl_status pwl_knapsack_greedy(const pwl_knapsack* inst, double rho, double range,
                               pwl_knapsack_result* out, size_t* selected, size_t capacity) {
  PWL_REQUIRE(inst);
  PWL_REQUIRE(out);
  return guard([&] {
    const auto o = pwlopt::knapsack::greedy_with_feedback(rho, inst->inst, range);
    out->feedback = to_c(o.feedback);
    out->total_value = o.total_value;
    out->loss = pwlopt::knapsack::loss(o, inst->inst.capacity);
    out->scaled_loss = pwlopt::knapsack::scaled_loss(o, inst->inst.capacity);
    out->selected_count = o.selected.size();
    if (selected != nullptr) {
      for (size_t i = 0; i < o.selected.size() && i < capacity; ++i) selected[i] = o.selected[i];
    }
  });
}

pwl_status pwl_knapsack_critical_values(const pwl_knapsack* inst, double range, double* out,
                                        size_t capacity, size_t* count) {
  PWL_REQUIRE(inst);
  PWL_REQUIRE(count);
  return guard([&] {
    const auto values = pwlopt::knapsack::enumerate_critical_values(inst->inst, range);
    *count = values.size();
    if (out == nullptr) return;
    if (capacity < values.size()) throw std::out_of_range("output buffer too small");
    std::copy(values.begin(), values.end(), out);
  });
}

pwl_status pwl_knapsack_search_feedback(const pwl_knapsack* inst, double rho, double range,
                                        double eps, pwl_interval* out, size_t* evaluations) {
  PWL_REQUIRE(inst);
  PWL_REQUIRE(out);
  return guard([&] {
    const auto run = [&](double x) {
      return pwlopt::knapsack::score_order(inst->inst, x);
    };
    const auto fb =
        pwlopt::binary_search_feedback(run, rho, eps, pwlopt::ParamSpace1D(0.0, range));
    *out = to_c(fb.interval);
    if (evaluations != nullptr) *evaluations = fb.evaluations;
  });
}

pwl_status pwl_distances_create(const double* entries, size_t n, double bound,
                                pwl_distances** out) {
  PWL_REQUIRE(out);
  if (n > 0) PWL_REQUIRE(entries);
  return guard([&] {
    *out = new pwl_distances{
        pwlopt::clustering::DistanceMatrix(n, {entries, entries + n * n}, bound)};
  });
}

pwl_status pwl_distances_load(const char* path, double bound, pwl_distances** out) {
  PWL_REQUIRE(path);
  PWL_REQUIRE(out);
  return guard(
      [&] {
        std::optional<double> b;
        if (bound > 0.0) b = bound;
        *out = new pwl_distances{pwlopt::clustering::read_distance_matrix_file(path, b)};
      },
      true);
}

void pwl_distances_destroy(pwl_distances* d) { delete d; }

size_t pwl_distances_size(const pwl_distances* d) { return d ? d->d.size() : 0; }

pwl_status pwl_linkage(const pwl_distances* d, double rho, pwl_merge* merges, size_t capacity,
                       pwl_interval* feedback) {
  PWL_REQUIRE(d);
  return guard([&] {
    const auto o = pwlopt::clustering::rho_linkage_with_feedback(rho, d->d);
    if (merges != nullptr) {
      if (capacity < o.tree.merges.size()) throw std::out_of_range("merge buffer too small");
      for (size_t k = 0; k < o.tree.merges.size(); ++k) {
        merges[k] = pwl_merge{o.tree.merges[k].first, o.tree.merges[k].second};
      }
    }
    if (feedback != nullptr) *feedback = to_c(o.feedback);
  });
}

pwl_status pwl_linkage_cells(const pwl_distances* d, pwl_interval* out, size_t capacity,
                             size_t* count) {
  PWL_REQUIRE(d);
  PWL_REQUIRE(count);
  return guard([&] {
    const auto cells = pwlopt::clustering::linkage_cells(d->d);
    *count = cells.size();
    if (out == nullptr) return;
    if (capacity < cells.size()) throw std::out_of_range("output buffer too small");
    for (size_t i = 0; i < cells.size(); ++i) out[i] = to_c(cells[i].feedback);
  });
}

pwl_status pwl_tree_cost(size_t leaves, const pwl_merge* merges, const int* labels, size_t k,
                         double* out) {
  PWL_REQUIRE(labels);
  PWL_REQUIRE(out);
  if (leaves > 1) PWL_REQUIRE(merges);
  return guard([&] {
    const auto tree = tree_from_c(leaves, merges);
    *out = pwlopt::clustering::tree_cost(tree, std::span<const int>(labels, leaves), k);
  });
}

pwl_status pwl_labels_load(const char* path, int* out, size_t capacity, size_t* count) {
  PWL_REQUIRE(path);
  PWL_REQUIRE(count);
  return guard(
      [&] {
        const auto labels = pwlopt::clustering::read_labels_file(path);
        *count = labels.size();
        if (out == nullptr) return;
        if (capacity < labels.size()) throw std::out_of_range("label buffer too small");
        std::copy(labels.begin(), labels.end(), out);
      },
      true);
}

pwl_status pwl_search_feedback(pwl_output_fn fn, void* context, double rho, double eps,
                               double lo, double hi, pwl_interval* out, size_t* evaluations) {
  PWL_REQUIRE(fn);
  PWL_REQUIRE(out);
  return guard([&] {
    const auto run = [&](double x) {
      uint64_t key = 0;
      if (fn(context, x, &key) != 0) {
        throw std::runtime_error("output callback failed at rho = " + std::to_string(x));
      }
      return key;
    };
    const auto fb = pwlopt::binary_search_feedback(run, rho, eps, pwlopt::ParamSpace1D(lo, hi));
    *out = to_c(fb.interval);
    if (evaluations != nullptr) *evaluations = fb.evaluations;
  });
}

pwl_status pwl_worst_ball_count(const double* locations, const size_t* offsets, size_t rounds,
                                double eps, size_t* out) {
  PWL_REQUIRE(offsets);
  PWL_REQUIRE(out);
  return guard([&] {
    pwlopt::dispersion::DiscontinuityProfile profile;
    for (size_t i = 0; i < rounds; ++i) {
      if (offsets[i] > offsets[i + 1]) throw std::invalid_argument("offsets must be ascending");
      if (offsets[i + 1] > offsets[i] && locations == nullptr) {
        throw std::invalid_argument("locations is null");
      }
      profile.rounds.emplace_back(locations + offsets[i], locations + offsets[i + 1]);
    }
    *out = pwlopt::dispersion::worst_ball_count(profile, eps);
  });
}

pwl_status pwl_knapsack_bound(double horizon, double eps, double items, double kappa,
                              double capacity, double additive_constant, double* out) {
  PWL_REQUIRE(out);
  return guard([&] {
    *out = pwlopt::dispersion::knapsack_bound(horizon, eps, items, kappa, capacity,
                                              additive_constant);
  });
}

pwl_status pwl_clustering_bound(double horizon, double eps, double points, double kappa,
                                double bound_b, double bound_m, double additive_constant,
                                double proof_constant, double* statement, double* proof) {
  PWL_REQUIRE(statement);
  PWL_REQUIRE(proof);
  return guard([&] {
    const auto b = pwlopt::dispersion::clustering_bound(horizon, eps, points, kappa, bound_b,
                                                        bound_m, additive_constant,
                                                        proof_constant);
    *statement = b.statement;
    *proof = b.proof;
  });
}

pwl_status pwl_validate_density_transforms(double kappa, double bound_m, double bound_b,
                                           size_t samples, uint64_t seed,
                                           pwl_density_check* out, size_t capacity,
                                           size_t* count) {
  PWL_REQUIRE(count);
  return guard([&] {
    pwlopt::Rng rng(seed);
    const auto checks =
        pwlopt::dispersion::validate_density_transforms(kappa, bound_m, bound_b, samples, rng);
    *count = checks.size();
    if (out == nullptr) return;
    if (capacity < checks.size()) throw std::out_of_range("output buffer too small");
    for (size_t i = 0; i < checks.size(); ++i) {
      pwl_density_check& c = out[i];
      std::memset(c.name, 0, sizeof c.name);
      std::strncpy(c.name, checks[i].name.c_str(), sizeof c.name - 1);
      c.max_density = checks[i].max_density;
      c.bound = checks[i].bound;
      c.allowed = checks[i].allowed;
      c.pass = checks[i].pass ? 1 : 0;
    }
  });
}

pwl_status pwl_config_create(pwl_config** out) {
  PWL_REQUIRE(out);
  return guard([&] { *out = new pwl_config{}; });
}

pwl_status pwl_config_parse(const char* toml, const char* source, pwl_config** out) {
  PWL_REQUIRE(toml);
  PWL_REQUIRE(out);
  return guard([&] {
    *out = new pwl_config{pwlopt::parse_config(toml, source ? source : "config")};
  });
}

pwl_status pwl_config_load(const char* path, pwl_config** out) {
  PWL_REQUIRE(path);
  PWL_REQUIRE(out);
  return guard([&] { *out = new pwl_config{pwlopt::load_config(path)}; });
}

void pwl_config_destroy(pwl_config* config) { delete config; }

pwl_status pwl_config_set(pwl_config* config, const char* key, const char* value) {
  PWL_REQUIRE(config);
  PWL_REQUIRE(key);
  PWL_REQUIRE(value);
  return guard([&] {
    try {
      pwlopt::apply_setting(config->config, key, value);
    } catch (const pwlopt::ConfigError& e) {
      throw pwlopt::ConfigError(std::string("--") + key, e.what());
    }
  });
}

pwl_status pwl_config_validate(const pwl_config* config) {
  PWL_REQUIRE(config);
  return guard([&] { pwlopt::validate(config->config); });
}

pwl_status pwl_experiment_run(const pwl_config* config, char** csv, char** trace) {
  PWL_REQUIRE(config);
  PWL_REQUIRE(csv);
  return guard([&] {
    const auto result = pwlopt::run_experiment(config->config, trace != nullptr);
    std::unique_ptr<char, decltype(&std::free)> body(copy_string(pwlopt::to_csv(result)),
                                                     &std::free);
    if (trace != nullptr) *trace = copy_string(result.trace);
    *csv = body.release();
  });
}

pwl_status pwl_dispersion_run(const pwl_config* config, char** csv) {
  PWL_REQUIRE(config);
  PWL_REQUIRE(csv);
  return guard([&] { *csv = copy_string(pwlopt::to_csv(pwlopt::run_dispersion(config->config))); });
}

}  // extern "C"
