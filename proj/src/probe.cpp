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

#include "ghbm/probe.hpp"

#include <algorithm>

#include "ghbm/errors.hpp"
#include "ghbm/rng.hpp"

namespace ghbm {

DeviationSample deviation_probe(std::size_t round, std::size_t tau,
                                std::span<const ParamVector> stored,
                                const ParamVector& reference) {
  if (stored.empty()) {
    throw EmptyAggregate("deviation_probe: no stored pseudo-gradients");
  }
  const double ref_sq = norm_sq(reference);
  if (!(ref_sq > 0.0)) {
    throw UndefinedProbe("deviation_probe: reference has zero norm");
  }
  const ParamVector avg = mean(stored);
  DeviationSample s;
  s.round = round;
  s.tau = tau;
  s.raw = norm_sq(sub(avg, reference));
  s.deviation = s.raw / ref_sq;
  return s;
}

ParamVector GradientInstance::global_grad() const { return mean(client_grads); }

double GradientInstance::heterogeneity() const {
  const ParamVector g = global_grad();
  double acc = 0.0;
  for (const auto& gi : client_grads) acc += norm_sq(sub(gi, g));
  return acc / static_cast<double>(client_grads.size());
}

namespace {

std::vector<std::size_t> window_union(const Sampler& sampler,
                                      std::size_t round, std::size_t tau) {
  std::vector<unsigned char> in(sampler.num_clients(), 0);
  for (std::size_t k = 0; k < tau && k < round; ++k) {
    for (std::size_t id : sampler.sample(round - k)) in[id] = 1;
  }
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in[i]) ids.push_back(i);
  }
  return ids;
}

}  // namespace

ParamVector window_gradient(const GradientInstance& inst, const Sampler& sampler,
                            std::size_t round, std::size_t tau) {
  // Ascending ids, so a full window reproduces global_grad() bit for bit.
  std::vector<ParamVector> picked;
  for (std::size_t id : window_union(sampler, round, tau)) {
    picked.push_back(inst.client_grads[id]);
  }
  return mean(picked);
}

BoundCheck lemma1_bound_check(const GradientInstance& inst, SamplerKind kind,
                              double participation, std::size_t tau,
                              std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw InvalidArgument("lemma1_bound_check: zero samples");
  const std::size_t K = inst.num_clients();
  const ParamVector g = inst.global_grad();
  const double g_sq = norm_sq(g);
  const double G2 = inst.heterogeneity();
  Rng rng = make_rng(seed, Stream::kBoundCheck);
  double lhs = 0.0, cover = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const Sampler sampler(kind, K, participation, rng());
    // End round at least tau so the window is full; offset spreads the phase.
    const std::size_t round = tau + uniform_index(rng, 4 * K);
    const auto ids = window_union(sampler, round, tau);
    std::vector<ParamVector> picked;
    picked.reserve(ids.size());
    for (std::size_t id : ids) picked.push_back(inst.client_grads[id]);
    lhs += norm_sq(sub(mean(picked), g));
    const double miss = static_cast<double>(K - ids.size()) /
                        static_cast<double>(K);
    cover += miss * miss;
  }
  BoundCheck out;
  out.samples = samples;
  out.lhs = lhs / static_cast<double>(samples);
  out.coverage_term = cover / static_cast<double>(samples);
  out.rhs = 8.0 * out.coverage_term * (G2 + g_sq);
  out.holds = out.lhs <= out.rhs;
  return out;
}

DeviationSample fixed_point_deviation(const GradientInstance& inst,
                                      const Sampler& sampler, std::size_t round,
                                      std::size_t tau) {
  if (round < tau) {
    throw InvalidArgument("fixed_point_deviation: window exceeds history");
  }
  std::vector<ParamVector> cohort_means;
  for (std::size_t k = tau; k-- > 0;) {
    std::vector<ParamVector> picked;
    for (std::size_t id : sampler.sample(round - k)) {
      picked.push_back(inst.client_grads[id]);
    }
    cohort_means.push_back(mean(picked));
  }
  return deviation_probe(round, tau, cohort_means, inst.global_grad());
}

}  // namespace ghbm
