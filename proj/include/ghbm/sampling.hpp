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

#ifndef GHBM_SAMPLING_HPP
#define GHBM_SAMPLING_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ghbm {

enum class SamplerKind { kUniform, kCyclic };

/// Client selection policy.
///
/// sample(t) is a pure function of (kind, K, C, seed, t). Cohorts have
/// m = max(1, floor(K * C)) members and are returned in ascending id order.
/// Cyclic splits one fixed seeded permutation of all clients into K / m
/// consecutive groups and visits them in order, so S^t = S^{t-p} and any p
/// consecutive cohorts partition the client set.
class Sampler {
 public:
  Sampler(SamplerKind kind, std::size_t num_clients, double participation,
          std::uint64_t seed);

  std::vector<std::size_t> sample(std::size_t round) const;

  SamplerKind kind() const noexcept { return kind_; }
  std::size_t num_clients() const noexcept { return num_clients_; }
  std::size_t cohort_size() const noexcept { return cohort_size_; }
  double participation() const noexcept { return participation_; }
  /// K / m for cyclic samplers; 0 for uniform ones.
  std::size_t period() const noexcept { return period_; }

 private:
  SamplerKind kind_;
  std::size_t num_clients_;
  double participation_;
  std::uint64_t seed_;
  std::size_t cohort_size_;
  std::size_t period_ = 0;
  std::vector<std::size_t> order_;
};

std::size_t cohort_size(std::size_t num_clients, double participation);

}  // namespace ghbm

#endif  // GHBM_SAMPLING_HPP
