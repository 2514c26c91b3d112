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

#ifndef GHBM_DATA_HPP
#define GHBM_DATA_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ghbm/tasks.hpp"

namespace ghbm {

/// Disjoint per-client index lists covering {0, ..., n-1}.
struct Partition {
  std::vector<std::vector<std::size_t>> clients;

  std::size_t num_clients() const noexcept { return clients.size(); }
  std::size_t num_samples() const noexcept;

  /// Throws InfeasiblePartition unless the lists are pairwise disjoint,
  /// cover exactly {0..n-1} and are all non-empty.
  void validate(std::size_t n) const;

  friend bool operator==(const Partition&, const Partition&) = default;
};

/// Label-skewed split: each client draws q_i ~ Dir(alpha * uniform) and
/// fills a quota of floor(n/K) (+1 for the first n mod K clients) by drawing
/// a class from q_i and taking an unused example of it. Exhausted classes
/// are redrawn from q_i restricted to classes with examples left, or
/// uniformly among them when q_i has no mass there. alpha == 0 puts all of
/// q_i on one class chosen uniformly among non-exhausted classes.
Partition partition_dirichlet(std::span<const double> labels,
                              std::size_t n_classes, std::size_t num_clients,
                              double alpha, std::uint64_t seed);

/// Contiguous blocks of the x-sorted order (first feature), sizes +-1.
Partition partition_domain_split(const Dataset& data, std::size_t num_clients);

/// Seeded shuffle then contiguous blocks, sizes +-1.
Partition partition_iid(std::size_t n, std::size_t num_clients,
                        std::uint64_t seed);

/// Block sizes for n samples over K clients: floor(n/K), the first n mod K
/// clients get one more.
std::vector<std::size_t> quota_sizes(std::size_t n, std::size_t num_clients);

/// JSON array of index arrays.
std::string partition_to_json(const Partition& p);
Partition partition_from_json(const std::string& text);

}  // namespace ghbm

#endif  // GHBM_DATA_HPP
