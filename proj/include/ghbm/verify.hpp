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

#ifndef GHBM_VERIFY_HPP
#define GHBM_VERIFY_HPP

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ghbm/forms.hpp"
#include "ghbm/probe.hpp"
#include "ghbm/tasks.hpp"

namespace ghbm {

struct PropertyResult {
  std::string suite;
  std::string property;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 7;
  /// Momentum displacement used by the heavy-ball forms; empty = the real one.
  DisplacementFn displacement;
};

std::vector<PropertyResult> verify_forms(const VerifyOptions& opt);
std::vector<PropertyResult> verify_sampler(const VerifyOptions& opt);
std::vector<PropertyResult> verify_gradients(const VerifyOptions& opt);
std::vector<PropertyResult> verify_zero_deviation(const VerifyOptions& opt);
std::vector<PropertyResult> verify_deviation_bound(const VerifyOptions& opt);

/// All suites in the order above.
std::vector<PropertyResult> verify_all(const VerifyOptions& opt);

void print_verify_table(std::ostream& out,
                        std::span<const PropertyResult> results);

// Building blocks shared with the test suites.

/// max_k |a_k - f_k| / max(|a|_inf, |f|_inf, floor): the largest coordinate
/// error relative to the gradient's scale.
double gradient_relative_error(const ParamVector& analytic,
                               const ParamVector& numeric,
                               double floor = 1e-12);

/// Largest gradient_relative_error over `draws` random (theta, batch) pairs.
double max_gradient_error(const TaskKind& kind, std::size_t draws,
                          std::uint64_t seed);

/// Full-batch client gradients at a fixed random theta for a small
/// classification problem split across `num_clients` clients by `alpha`.
GradientInstance make_gradient_instance(std::size_t num_clients,
                                        std::size_t n_classes, double alpha,
                                        std::uint64_t seed);

}  // namespace ghbm

#endif  // GHBM_VERIFY_HPP
