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

#include <algorithm>
#include <vector>

#include "doctest.h"
#include "ghbm/errors.hpp"
#include "ghbm/probe.hpp"
#include "ghbm/sampling.hpp"
#include "ghbm/verify.hpp"

using namespace ghbm;

namespace {

GradientInstance three_clients() {
  GradientInstance inst;
  inst.client_grads = {ParamVector{1.0, 0.0}, ParamVector{0.0, 2.0},
                       ParamVector{-3.0, 1.0}};
  return inst;
}

double sq_dist(const ParamVector& a, const ParamVector& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.dim(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

}  // namespace

TEST_CASE("deviation probe arithmetic") {
  const ParamVector ref{1.0, 0.0};
  const std::vector<ParamVector> same{ref};
  CHECK(deviation_probe(4, 1, same, ref).deviation == 0.0);
  const std::vector<ParamVector> two{ParamVector{1.0, 0.0}, ParamVector{3.0, 0.0}};
  const DeviationSample s = deviation_probe(4, 2, two, ParamVector{1.0, 0.0});
  CHECK(s.round == 4);
  CHECK(s.tau == 2);
  CHECK(s.raw == 1.0);
  CHECK(s.deviation == 1.0);
  const DeviationSample half = deviation_probe(4, 2, two, ParamVector{2.0, 2.0});
  CHECK(half.raw == 4.0);
  CHECK(half.deviation == 0.5);
  CHECK_THROWS_AS(deviation_probe(1, 1, two, ParamVector{0.0, 0.0}),
                  UndefinedProbe);
  CHECK_THROWS_AS(deviation_probe(1, 1, std::vector<ParamVector>{}, ref),
                  EmptyAggregate);
}

TEST_CASE("gradient instance statistics") {
  const GradientInstance inst = three_clients();
  CHECK(inst.global_grad() == ParamVector{-2.0 / 3.0, 1.0});
  // Brute force: (1/3) sum |g_i - g|^2.
  const ParamVector g{-2.0 / 3.0, 1.0};
  double h = 0.0;
  for (const auto& gi : inst.client_grads) h += sq_dist(gi, g);
  CHECK(inst.heterogeneity() == doctest::Approx(h / 3.0));
}

TEST_CASE("full participation gives zero deviation") {
  const GradientInstance inst = three_clients();
  const Sampler all(SamplerKind::kUniform, 3, 1.0, 2);
  for (std::size_t t = 1; t <= 5; ++t) {
    CHECK(fixed_point_deviation(inst, all, t, 1).deviation == 0.0);
  }
}

TEST_CASE("uniform windows that repeat a client deviate") {
  const GradientInstance inst = three_clients();
  const ParamVector g = inst.global_grad();
  const Sampler s(SamplerKind::kUniform, 3, 1.0 / 3.0, 11);
  std::size_t repeated = 0;
  for (std::size_t t = 3; t <= 40; ++t) {
    std::vector<std::size_t> ids;
    for (std::size_t k = 0; k < 3; ++k) ids.push_back(s.sample(t - k).front());
    const bool distinct = ids[0] != ids[1] && ids[1] != ids[2] && ids[0] != ids[2];
    ParamVector avg(2);
    for (std::size_t id : ids) {
      avg[0] += inst.client_grads[id][0] / 3.0;
      avg[1] += inst.client_grads[id][1] / 3.0;
    }
    const double expect = sq_dist(avg, g) / (g[0] * g[0] + g[1] * g[1]);
    const DeviationSample d = fixed_point_deviation(inst, s, t, 3);
    CHECK(d.deviation == doctest::Approx(expect).epsilon(1e-12));
    if (distinct) {
      CHECK(d.deviation < 1e-30);
    } else {
      CHECK(d.deviation > 0.0);
      ++repeated;
    }
  }
  CHECK(repeated > 0);
}

TEST_CASE("cyclic window of one period covers everyone") {
  const GradientInstance inst = make_gradient_instance(10, 4, 0.0, 3);
  const Sampler s(SamplerKind::kCyclic, 10, 0.2, 5);
  for (std::size_t t = 5; t <= 20; ++t) {
    CHECK(fixed_point_deviation(inst, s, t, 5).deviation <= 1e-10);
    CHECK(window_gradient(inst, s, t, 5) == inst.global_grad());
  }
  CHECK(fixed_point_deviation(inst, s, 7, 1).deviation > 0.0);
  CHECK_THROWS_AS(fixed_point_deviation(inst, s, 3, 5), InvalidArgument);
}

TEST_CASE("bound check at the cyclic endpoint is exact") {
  const GradientInstance inst = make_gradient_instance(10, 4, 0.0, 8);
  const BoundCheck b = lemma1_bound_check(inst, SamplerKind::kCyclic, 0.2, 5, 1000, 1);
  CHECK(b.lhs == 0.0);
  CHECK(b.rhs == 0.0);
  CHECK(b.holds);
}

TEST_CASE("identical clients never deviate") {
  GradientInstance inst;
  inst.client_grads.assign(8, ParamVector{0.5, -1.0, 2.0});
  for (SamplerKind kind : {SamplerKind::kUniform, SamplerKind::kCyclic}) {
    const BoundCheck b = lemma1_bound_check(inst, kind, 0.25, 2, 1000, 4);
    CHECK(b.lhs == 0.0);
    CHECK(b.holds);
  }
}

TEST_CASE("bound check against exact enumeration") {
  // K = 6, C = 1/3, tau = 1: the window is one uniform pair.
  const GradientInstance inst = make_gradient_instance(6, 3, 0.1, 21);
  const ParamVector g = inst.global_grad();
  double exact = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < 6; ++a) {
    for (std::size_t b = a + 1; b < 6; ++b) {
      ParamVector m(g.dim());
      for (std::size_t k = 0; k < g.dim(); ++k) {
        m[k] = 0.5 * (inst.client_grads[a][k] + inst.client_grads[b][k]);
      }
      exact += sq_dist(m, g);
      ++pairs;
    }
  }
  exact /= static_cast<double>(pairs);
  double norm_g = 0.0;
  for (double v : g) norm_g += v * v;
  const double rhs = 8.0 * (4.0 / 6.0) * (4.0 / 6.0) * (inst.heterogeneity() + norm_g);

  const BoundCheck b =
      lemma1_bound_check(inst, SamplerKind::kUniform, 1.0 / 3.0, 1, 20000, 2);
  CHECK(b.samples == 20000);
  CHECK(b.coverage_term == doctest::Approx(4.0 / 9.0).epsilon(1e-12));
  CHECK(b.rhs == doctest::Approx(rhs).epsilon(1e-12));
  CHECK(b.lhs == doctest::Approx(exact).epsilon(0.05));
  CHECK(b.holds);
  CHECK(exact < rhs);
  CHECK_THROWS_AS(lemma1_bound_check(inst, SamplerKind::kUniform, 0.5, 1, 0, 2),
                  InvalidArgument);
}
