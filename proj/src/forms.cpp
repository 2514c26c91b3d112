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

#include "ghbm/forms.hpp"

#include <algorithm>
#include <cmath>

#include "ghbm/algorithms.hpp"
#include "ghbm/errors.hpp"

namespace ghbm {

namespace {

const DisplacementFn& or_default(const DisplacementFn& fn) {
  static const DisplacementFn kDefault = momentum_from_displacement;
  return fn ? fn : kDefault;
}

}  // namespace

Trajectory classical_moving_average(const ParamVector& theta0,
                                    const GradientOracle& gradient,
                                    double beta, double eta,
                                    std::size_t steps) {
  Trajectory traj{theta0};
  ParamVector m(theta0.dim());
  for (std::size_t t = 1; t <= steps; ++t) {
    m = hbm_moving_average(m, gradient(t, traj.back()), beta);
    traj.push_back(axpy(-eta, m, traj.back()));
  }
  return traj;
}

Trajectory classical_heavy_ball(const ParamVector& theta0,
                                const GradientOracle& gradient, double beta,
                                double eta, std::size_t steps,
                                const DisplacementFn& displacement) {
  return generalized_heavy_ball(theta0, gradient, beta, eta, 1, steps,
                                displacement);
}

Trajectory generalized_moving_average(const ParamVector& theta0,
                                      const GradientOracle& gradient,
                                      double beta, double eta, std::size_t tau,
                                      std::size_t steps) {
  if (tau < 1) throw InvalidArgument("generalized momentum: tau must be >= 1");
  Trajectory traj{theta0};
  // momenta[s] holds m^{s}; index 0 is the zero initial momentum.
  std::vector<ParamVector> momenta{ParamVector(theta0.dim())};
  for (std::size_t t = 1; t <= steps; ++t) {
    ParamVector acc(theta0.dim());
    for (std::size_t k = 1; k <= tau && k <= t; ++k) {
      axpy_inplace(1.0, momenta[t - k], acc);
    }
    ParamVector m =
        axpy(beta / static_cast<double>(tau), acc, gradient(t, traj.back()));
    traj.push_back(axpy(-eta, m, traj.back()));
    momenta.push_back(std::move(m));
  }
  return traj;
}

Trajectory generalized_heavy_ball(const ParamVector& theta0,
                                  const GradientOracle& gradient, double beta,
                                  double eta, std::size_t tau,
                                  std::size_t steps,
                                  const DisplacementFn& displacement) {
  if (tau < 1) throw InvalidArgument("generalized momentum: tau must be >= 1");
  const DisplacementFn& disp = or_default(displacement);
  Trajectory traj{theta0};
  for (std::size_t t = 1; t <= steps; ++t) {
    const ParamVector& prev = traj[t - 1];
    const ParamVector& lagged = t >= tau + 1 ? traj[t - tau - 1] : traj[0];
    // beta * (theta^{t-1} - theta^{t-tau-1}) / tau
    ParamVector next = axpy(beta, disp(prev, lagged, static_cast<double>(tau), 1),
                            prev);
    axpy_inplace(-eta, gradient(t, prev), next);
    traj.push_back(std::move(next));
  }
  return traj;
}

double trajectory_deviation(const Trajectory& a, const Trajectory& b) {
  if (a.size() != b.size()) {
    throw InvalidDimension("trajectory_deviation: length mismatch");
  }
  double worst = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    require_same_dim(a[t], b[t], "trajectory_deviation");
    double scale_ref = 0.0, diff = 0.0;
    for (std::size_t k = 0; k < a[t].dim(); ++k) {
      scale_ref = std::max({scale_ref, std::abs(a[t][k]), std::abs(b[t][k])});
      diff = std::max(diff, std::abs(a[t][k] - b[t][k]));
    }
    if (diff > 0.0) worst = std::max(worst, diff / scale_ref);
  }
  return worst;
}

}  // namespace ghbm
