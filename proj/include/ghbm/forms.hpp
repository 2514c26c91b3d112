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

#ifndef GHBM_FORMS_HPP
#define GHBM_FORMS_HPP

#include <cstddef>
#include <functional>
#include <vector>

#include "ghbm/params.hpp"

namespace ghbm {

/// Server-side momentum recursions on a single model, used to check that the
/// moving-average and heavy-ball formulations produce the same iterates.
///
/// `gradient(t, theta)` supplies the step-t gradient at theta^{t-1}; it may
/// ignore theta to replay a fixed sequence. Trajectories hold theta^0..theta^T.
using GradientOracle =
    std::function<ParamVector(std::size_t t, const ParamVector& theta)>;

/// Momentum term in heavy-ball form: the displacement (recent - past) scaled
/// by 1 / (span * local_steps). Swappable so tests can inject faults.
using DisplacementFn = std::function<ParamVector(
    const ParamVector& recent, const ParamVector& past, double span,
    std::size_t local_steps)>;

using Trajectory = std::vector<ParamVector>;

/// m^t = beta m^{t-1} + g^t;  theta^t = theta^{t-1} - eta m^t.
Trajectory classical_moving_average(const ParamVector& theta0,
                                    const GradientOracle& gradient,
                                    double beta, double eta, std::size_t steps);

/// theta^t = theta^{t-1} + beta (theta^{t-1} - theta^{t-2}) - eta g^t,
/// with theta^{-1} = theta^0.
Trajectory classical_heavy_ball(const ParamVector& theta0,
                                const GradientOracle& gradient, double beta,
                                double eta, std::size_t steps,
                                const DisplacementFn& displacement = {});

/// m^t = (beta / tau) sum_{k=1..tau} m^{t-k} + g^t;  theta^t = theta^{t-1} -
/// eta m^t, with m^{s} = 0 for s <= 0.
Trajectory generalized_moving_average(const ParamVector& theta0,
                                      const GradientOracle& gradient,
                                      double beta, double eta, std::size_t tau,
                                      std::size_t steps);

/// theta^t = theta^{t-1} + (beta / tau)(theta^{t-1} - theta^{t-tau-1}) -
/// eta g^t, with theta^{s} = theta^0 for s < 0.
Trajectory generalized_heavy_ball(const ParamVector& theta0,
                                  const GradientOracle& gradient, double beta,
                                  double eta, std::size_t tau,
                                  std::size_t steps,
                                  const DisplacementFn& displacement = {});

/// Largest per-iterate deviation max_k |a_k - b_k| / max(|a|_inf, |b|_inf)
/// across two equal-length trajectories.
double trajectory_deviation(const Trajectory& a, const Trajectory& b);

}  // namespace ghbm

#endif  // GHBM_FORMS_HPP
