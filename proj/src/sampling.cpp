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

#include "ghbm/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ghbm/data.hpp"
#include "ghbm/errors.hpp"
#include "ghbm/rng.hpp"

namespace ghbm {

std::size_t cohort_size(std::size_t num_clients, double participation) {
  if (num_clients == 0) throw ConfigError("sampler: need at least one client");
  if (!(participation > 0.0 && participation <= 1.0)) {
    throw ConfigError("sampler: participation must be in (0, 1]");
  }
  // The epsilon absorbs products like 0.29 * 100 = 28.999999999999996.
  const double raw = static_cast<double>(num_clients) * participation;
  const auto m = static_cast<std::size_t>(std::floor(raw + 1e-9));
  return std::clamp<std::size_t>(m, 1, num_clients);
}

Sampler::Sampler(SamplerKind kind, std::size_t num_clients,
                 double participation, std::uint64_t seed)
    : kind_(kind),
      num_clients_(num_clients),
      participation_(participation),
      seed_(seed),
      cohort_size_(ghbm::cohort_size(num_clients, participation)) {
  if (kind_ == SamplerKind::kCyclic) {
    if (num_clients_ % cohort_size_ != 0) {
      throw ConfigError("cyclic sampler: K = " + std::to_string(num_clients_) +
                        " is not divisible by cohort size " +
                        std::to_string(cohort_size_));
    }
    period_ = num_clients_ / cohort_size_;
    order_ = all_indices(num_clients_);
    Rng rng = make_rng(seed_, Stream::kCyclicOrder);
    shuffle(order_, rng);
  }
}

std::vector<std::size_t> Sampler::sample(std::size_t round) const {
  if (round < 1) throw InvalidArgument("sampler: rounds start at 1");
  std::vector<std::size_t> cohort;
  if (kind_ == SamplerKind::kCyclic) {
    const std::size_t group = (round - 1) % period_;
    const auto first = order_.begin() +
                       static_cast<std::ptrdiff_t>(group * cohort_size_);
    cohort.assign(first, first + static_cast<std::ptrdiff_t>(cohort_size_));
  } else {
    auto ids = all_indices(num_clients_);
    Rng rng = make_rng(seed_, Stream::kSampler, {round});
    // Partial Fisher-Yates: the first m slots are a uniform m-subset.
    for (std::size_t i = 0; i < cohort_size_; ++i) {
      const std::size_t j = i + uniform_index(rng, num_clients_ - i);
      std::swap(ids[i], ids[j]);
    }
    cohort.assign(ids.begin(),
                  ids.begin() + static_cast<std::ptrdiff_t>(cohort_size_));
  }
  std::sort(cohort.begin(), cohort.end());
  return cohort;
}

}  // namespace ghbm
