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

#ifndef GHBM_PROBE_HPP
#define GHBM_PROBE_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ghbm/params.hpp"
#include "ghbm/sampling.hpp"

namespace ghbm {

/// Deviation between the tau-window average of server pseudo-gradients and
/// the all-clients pseudo-gradient at the current parameters.
struct DeviationSample {
  std::size_t round = 0;
  std::size_t tau = 0;
  double deviation = 0.0;  // squared distance / squared reference norm
  double raw = 0.0;        // squared distance
};

/// `stored` holds the last pseudo-gradients, oldest first; all of them are
/// averaged. Throws UndefinedProbe when the reference has zero norm and
/// EmptyAggregate when nothing is stored.
DeviationSample deviation_probe(std::size_t round, std::size_t tau,
                                std::span<const ParamVector> stored,
                                const ParamVector& reference);

/// Static instance for the deviation bound: one full-batch gradient per client
/// at a fixed model.
struct GradientInstance {
  std::vector<ParamVector> client_grads;

  std::size_t num_clients() const noexcept { return client_grads.size(); }
  ParamVector global_grad() const;
  /// (1/K) sum_i |g_i - g|^2, computed exactly.
  double heterogeneity() const;
};

struct BoundCheck {
  double lhs = 0.0;            // Monte-Carlo E|g_window - grad f|^2
  double rhs = 0.0;            // 8 E[((K - |S_tau|)/K)^2] (G^2 + |grad f|^2)
  double coverage_term = 0.0;  // E[((K - |S_tau|)/K)^2]
  std::size_t samples = 0;
  bool holds = false;
};

/// Mean gradient over the union of the last tau cohorts ending at `round`.
ParamVector window_gradient(const GradientInstance& inst, const Sampler& sampler,
                            std::size_t round, std::size_t tau);

/// Estimates both sides of the deviation bound over `samples` independent
/// schedules: each sample draws a fresh sampler seed and an end round.
BoundCheck lemma1_bound_check(const GradientInstance& inst, SamplerKind kind,
                              double participation, std::size_t tau,
                              std::size_t samples, std::uint64_t seed);

/// Cohort-window deviation at a fixed model: each of the last tau cohorts
/// contributes the mean of its clients' gradients; the result is the
/// deviation of their average from the all-clients mean.
DeviationSample fixed_point_deviation(const GradientInstance& inst,
                                      const Sampler& sampler, std::size_t round,
                                      std::size_t tau);

}  // namespace ghbm

#endif  // GHBM_PROBE_HPP
