// Copyright 2026 The GHBM Simulator Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ghbm/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "ghbm/algorithms.hpp"
#include "ghbm/data.hpp"
#include "ghbm/engine.hpp"
#include "ghbm/rng.hpp"
#include "ghbm/sampling.hpp"

namespace ghbm {

namespace {

constexpr double kFormTolerance = 1e-9;
constexpr double kGradTolerance = 1e-5;
constexpr double kZeroTolerance = 1e-10;

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

PropertyResult check(std::string suite, std::string property, bool ok,
                     std::string detail) {
  return {std::move(suite), std::move(property), ok, std::move(detail)};
}

ParamVector normal_vector(Rng& rng, std::size_t dim, double scale) {
  std::normal_distribution<double> nd(0.0, scale);
  std::vector<double> v(dim);
  for (auto& x : v) x = nd(rng);
  return ParamVector(std::move(v));
}

// Gradient of 0.5 sum_k a_k (theta_k - c_k)^2 plus a round-dependent shift,
// so the recursions see both state and time dependence.
GradientOracle test_oracle(std::size_t dim, std::uint64_t seed) {
  Rng rng = make_rng(seed, Stream::kVerify, {1});
  std::vector<double> a(dim), c(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    a[k] = 0.5 + 2.0 * uniform01(rng);
    c[k] = 2.0 * uniform01(rng) - 1.0;
  }
  return [a, c](std::size_t t, const ParamVector& theta) {
    std::vector<double> g(theta.dim());
    for (std::size_t k = 0; k < g.size(); ++k) {
      g[k] = a[k] * (theta[k] - c[k]) +
             0.1 * std::sin(static_cast<double>(t * (k + 1)));
    }
    return ParamVector(std::move(g));
  };
}

}  // namespace

double gradient_relative_error(const ParamVector& analytic,
                               const ParamVector& numeric, double floor) {
  require_same_dim(analytic, numeric, "gradient_relative_error");
  double diff = 0.0, scale = floor;
  for (std::size_t k = 0; k < analytic.dim(); ++k) {
    diff = std::max(diff, std::abs(analytic[k] - numeric[k]));
    scale = std::max({scale, std::abs(analytic[k]), std::abs(numeric[k])});
  }
  return diff / scale;
}

double max_gradient_error(const TaskKind& kind, std::size_t draws,
                          std::uint64_t seed) {
  Dataset data;
  double theta_scale = 0.5;
  if (std::holds_alternative<QuadraticRegression>(kind)) {
    QuadraticSpec spec;
    spec.n = 64;
    spec.noise_std = 1.0;
    data = generate_quadratic_dataset(spec, seed);
    theta_scale = 5.0;
  } else if (const auto* lr = std::get_if<LogisticRegression>(&kind)) {
    data = generate_synthetic_classification(64, lr->d_in, lr->n_classes, 1.0,
                                             seed);
  } else {
    const auto& m = std::get<Mlp>(kind);
    data = generate_synthetic_classification(64, m.d_in, m.n_classes, 1.0,
                                             seed);
  }
  Rng rng = make_rng(seed, Stream::kVerify, {2});
  double worst = 0.0;
  for (std::size_t d = 0; d < draws; ++d) {
    const ParamVector theta = normal_vector(rng, param_dim(kind), theta_scale);
    std::vector<std::size_t> batch = all_indices(data.n);
    shuffle(batch, rng);
    batch.resize(1 + uniform_index(rng, 16));
    const auto a = grad(kind, theta, data, batch);
    const auto f = finite_diff_grad(kind, theta, data, batch, 1e-5);
    worst = std::max(worst, gradient_relative_error(a, f));
  }
  return worst;
}

GradientInstance make_gradient_instance(std::size_t num_clients,
                                        std::size_t n_classes, double alpha,
                                        std::uint64_t seed) {
  const std::size_t d_in = 3;
  const Dataset data = generate_synthetic_classification(
      num_clients * 12, d_in, n_classes, 1.0, seed);
  const Partition part =
      partition_dirichlet(data.labels, n_classes, num_clients, alpha, seed);
  const TaskKind kind = LogisticRegression{n_classes, d_in};
  Rng rng = make_rng(seed, Stream::kVerify, {3});
  const ParamVector theta = normal_vector(rng, param_dim(kind), 0.5);
  GradientInstance inst;
  for (const auto& idx : part.clients) {
    inst.client_grads.push_back(grad(kind, theta, data, idx));
  }
  return inst;
}

std::vector<PropertyResult> verify_forms(const VerifyOptions& opt) {
  std::vector<PropertyResult> out;
  const std::size_t dim = 6, steps = 20;
  const auto oracle = test_oracle(dim, opt.seed);
  Rng rng = make_rng(opt.seed, Stream::kVerify, {4});
  const ParamVector theta0 = normal_vector(rng, dim, 1.0);
  const double beta = 0.9, eta = 0.05;

  const double dc =
      trajectory_deviation(classical_moving_average(theta0, oracle, beta, eta, steps),
                           classical_heavy_ball(theta0, oracle, beta, eta, steps,
                                                opt.displacement));
  out.push_back(check("forms", "classical moving-average == heavy-ball",
                      dc < kFormTolerance, "max rel dev " + sci(dc)));
  for (std::size_t tau : {1, 2, 5}) {
    const double d = trajectory_deviation(
        generalized_moving_average(theta0, oracle, beta, eta, tau, steps),
        generalized_heavy_ball(theta0, oracle, beta, eta, tau, steps,
                               opt.displacement));
    out.push_back(check("forms",
                        "generalized moving-average == heavy-ball, tau=" +
                            std::to_string(tau),
                        d < kFormTolerance, "max rel dev " + sci(d)));
  }
  return out;
}

std::vector<PropertyResult> verify_sampler(const VerifyOptions& opt) {
  std::vector<PropertyResult> out;
  struct Case {
    std::size_t K;
    double C;
  };
  const Case cases[] = {{10, 0.2}, {12, 0.25}, {7, 1.0}, {20, 0.05}, {50, 0.2}};
  bool shape_ok = true, cyclic_ok = true, replay_ok = true;
  std::string why;
  for (const auto& c : cases) {
    for (SamplerKind kind : {SamplerKind::kUniform, SamplerKind::kCyclic}) {
      const Sampler s(kind, c.K, c.C, opt.seed);
      const Sampler again(kind, c.K, c.C, opt.seed);
      const std::size_t m = s.cohort_size();
      std::vector<std::size_t> seen(c.K, 0);
      const std::size_t p = c.K / m;
      for (std::size_t t = 1; t <= 3 * p; ++t) {
        const auto ids = s.sample(t);
        const bool sorted = std::is_sorted(ids.begin(), ids.end()) &&
                            std::adjacent_find(ids.begin(), ids.end()) == ids.end();
        const bool in_range =
            std::all_of(ids.begin(), ids.end(), [&](auto i) { return i < c.K; });
        if (ids.size() != m || !sorted || !in_range) {
          shape_ok = false;
          why = "K=" + std::to_string(c.K) + " t=" + std::to_string(t);
        }
        if (ids != again.sample(t)) replay_ok = false;
        if (kind == SamplerKind::kCyclic) {
          for (auto i : ids) ++seen[i];
          if (t % p == 0) {
            if (!std::all_of(seen.begin(), seen.end(),
                             [&](auto n) { return n == t / p; })) {
              cyclic_ok = false;
            }
          }
        }
      }
    }
  }
  out.push_back(check("sampler", "cohorts have size m, sorted, distinct ids",
                      shape_ok, shape_ok ? "5 configs x 2 kinds" : why));
  out.push_back(check("sampler", "cyclic covers every client once per period",
                      cyclic_ok, ""));
  out.push_back(check("sampler", "same seed replays the same schedule",
                      replay_ok, ""));
  return out;
}

std::vector<PropertyResult> verify_gradients(const VerifyOptions& opt) {
  std::vector<PropertyResult> out;
  const TaskKind kinds[] = {QuadraticRegression{}, LogisticRegression{4, 5},
                            Mlp{4, 6, 3}};
  for (const auto& kind : kinds) {
    const double e = max_gradient_error(kind, 50, opt.seed);
    out.push_back(check("gradients",
                        task_name(kind) + " analytic == finite differences",
                        e < kGradTolerance, "max rel err " + sci(e)));
  }
  return out;
}

std::vector<PropertyResult> verify_zero_deviation(const VerifyOptions& opt) {
  std::vector<PropertyResult> out;
  RunConfig cfg;
  cfg.task.family = TaskFamily::kLogistic;
  cfg.task.n = 400;
  cfg.task.d_in = 5;
  cfg.task.n_classes = 5;
  cfg.partition.kind = PartitionKind::kDirichlet;
  cfg.partition.num_clients = 10;
  cfg.partition.alpha = 0.0;
  cfg.sampler.kind = SamplerKind::kCyclic;
  cfg.sampler.participation = 0.2;
  cfg.algorithm.kind = Algorithm::kGhbmPractical;
  cfg.algorithm.tau = 5;
  cfg.algorithm.local_steps = 1;
  cfg.algorithm.client_lr = 0.1;
  cfg.batch_size = 0;
  cfg.rounds = 10;
  cfg.seed = opt.seed;

  Simulation sim(cfg);
  for (int i = 0; i < 3; ++i) sim.step();  // move off the zero init
  const GradientInstance inst = sim.all_clients_pseudo_gradients();
  double worst = 0.0;
  for (std::size_t t = 5; t <= 15; ++t) {
    worst = std::max(worst,
                     fixed_point_deviation(inst, sim.sampler(), t, 5).deviation);
  }
  out.push_back(check("zero-deviation",
                      "cyclic, tau = 1/C, J = 1, full batch: deviation = 0",
                      worst <= kZeroTolerance, "max deviation " + sci(worst)));

  const Sampler uniform(SamplerKind::kUniform, 10, 0.2, opt.seed);
  double mean_dev = 0.0;
  for (std::size_t t = 5; t <= 15; ++t) {
    mean_dev += fixed_point_deviation(inst, uniform, t, 5).deviation / 11.0;
  }
  out.push_back(check("zero-deviation", "uniform sampling, tau = 1/C: deviation > 0",
                      mean_dev > kZeroTolerance, "mean deviation " + sci(mean_dev)));
  return out;
}

std::vector<PropertyResult> verify_deviation_bound(const VerifyOptions& opt) {
  std::vector<PropertyResult> out;
  Rng rng = make_rng(opt.seed, Stream::kVerify, {5});
  std::size_t checks = 0, failures = 0;
  std::string first_failure;
  for (std::size_t inst_id = 0; inst_id < 12; ++inst_id) {
    const std::size_t K = 4 + uniform_index(rng, 17);  // 4..20
    std::vector<std::size_t> divisors;
    for (std::size_t m = 1; m < K; ++m) {
      if (K % m == 0) divisors.push_back(m);
    }
    const std::size_t m = divisors[uniform_index(rng, divisors.size())];
    const double C = static_cast<double>(m) / static_cast<double>(K);
    const double alpha = inst_id % 2 == 0 ? 0.0 : 1.0;
    const auto inst = make_gradient_instance(K, 4, alpha, rng());
    for (std::size_t tau = 1; tau <= K / m; ++tau) {
      for (SamplerKind kind : {SamplerKind::kUniform, SamplerKind::kCyclic}) {
        const auto bc = lemma1_bound_check(inst, kind, C, tau, 1000, rng());
        ++checks;
        if (!bc.holds) {
          ++failures;
          if (first_failure.empty()) {
            first_failure = "K=" + std::to_string(K) + " m=" + std::to_string(m) +
                            " tau=" + std::to_string(tau) + " lhs " + sci(bc.lhs) +
                            " rhs " + sci(bc.rhs);
          }
        }
      }
    }
  }
  out.push_back(check("deviation_bound", "Monte-Carlo lhs <= rhs on random instances",
                      failures == 0,
                      failures == 0 ? std::to_string(checks) + " checks"
                                    : first_failure));
  return out;
}

std::vector<PropertyResult> verify_all(const VerifyOptions& opt) {
  std::vector<PropertyResult> out;
  for (auto* suite : {&verify_forms, &verify_sampler, &verify_gradients,
                      &verify_zero_deviation, &verify_deviation_bound}) {
    auto part = suite(opt);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

void print_verify_table(std::ostream& out,
                        std::span<const PropertyResult> results) {
  std::size_t width = 0;
  for (const auto& r : results) {
    width = std::max(width, r.suite.size() + r.property.size() + 3);
  }
  for (const auto& r : results) {
    std::string name = r.suite + " / " + r.property;
    name.resize(width, ' ');
    out << (r.passed ? "PASS  " : "FAIL  ") << name;
    if (!r.detail.empty()) out << "  " << r.detail;
    out << '\n';
  }
}

}  // namespace ghbm
