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

#include "ghbm/data.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "json.hpp"

#include "ghbm/errors.hpp"
#include "ghbm/rng.hpp"

namespace ghbm {

std::size_t Partition::num_samples() const noexcept {
  std::size_t total = 0;
  for (const auto& c : clients) total += c.size();
  return total;
}

void Partition::validate(std::size_t n) const {
  std::vector<unsigned char> seen(n, 0);
  std::size_t covered = 0;
  for (std::size_t k = 0; k < clients.size(); ++k) {
    if (clients[k].empty()) {
      throw InfeasiblePartition("partition: client " + std::to_string(k) +
                                " holds no samples");
    }
    for (std::size_t i : clients[k]) {
      if (i >= n) throw InfeasiblePartition("partition: index out of range");
      if (seen[i]) {
        throw InfeasiblePartition("partition: index " + std::to_string(i) +
                                  " assigned twice");
      }
      seen[i] = 1;
      ++covered;
    }
  }
  if (covered != n) throw InfeasiblePartition("partition: incomplete cover");
}

std::vector<std::size_t> quota_sizes(std::size_t n, std::size_t num_clients) {
  if (num_clients == 0) throw InfeasiblePartition("partition: zero clients");
  if (num_clients > n) {
    throw InfeasiblePartition("partition: " + std::to_string(num_clients) +
                              " clients but only " + std::to_string(n) +
                              " samples");
  }
  std::vector<std::size_t> sizes(num_clients, n / num_clients);
  for (std::size_t k = 0; k < n % num_clients; ++k) ++sizes[k];
  return sizes;
}

namespace {

Partition blocks(const std::vector<std::size_t>& order,
                 std::size_t num_clients) {
  const auto sizes = quota_sizes(order.size(), num_clients);
  Partition p;
  p.clients.reserve(num_clients);
  std::size_t at = 0;
  for (std::size_t s : sizes) {
    p.clients.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(at),
                           order.begin() + static_cast<std::ptrdiff_t>(at + s));
    at += s;
  }
  return p;
}

std::size_t draw_weighted(const std::vector<double>& w, double total,
                          Rng& rng) {
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  std::size_t last = w.size();
  for (std::size_t c = 0; c < w.size(); ++c) {
    if (w[c] <= 0.0) continue;
    acc += w[c];
    last = c;
    if (u < acc) return c;
  }
  return last;  // rounding at the upper end
}

std::size_t draw_uniform_remaining(
    const std::vector<std::vector<std::size_t>>& pools, Rng& rng) {
  std::vector<std::size_t> live;
  for (std::size_t c = 0; c < pools.size(); ++c) {
    if (!pools[c].empty()) live.push_back(c);
  }
  return live[uniform_index(rng, live.size())];
}

}  // namespace

Partition partition_dirichlet(std::span<const double> labels,
                              std::size_t n_classes, std::size_t num_clients,
                              double alpha, std::uint64_t seed) {
  if (!(alpha >= 0.0)) {
    throw InvalidArgument("partition_dirichlet: alpha must be >= 0");
  }
  if (n_classes == 0) {
    throw InvalidArgument("partition_dirichlet: need class labels");
  }
  const std::size_t n = labels.size();
  const auto quotas = quota_sizes(n, num_clients);

  Rng rng = make_rng(seed, Stream::kPartition);
  std::vector<std::vector<std::size_t>> pools(n_classes);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    if (c >= n_classes) {
      throw InvalidArgument("partition_dirichlet: label out of range");
    }
    pools[c].push_back(i);
  }
  for (auto& pool : pools) shuffle(pool, rng);

  Partition p;
  p.clients.resize(num_clients);
  if (alpha == 0.0) {
    // One class per client, filled client by client so that a class is
    // exhausted exactly at client boundaries when counts allow it.
    for (std::size_t k = 0; k < num_clients; ++k) {
      std::size_t c = draw_uniform_remaining(pools, rng);
      auto& mine = p.clients[k];
      mine.reserve(quotas[k]);
      for (std::size_t s = 0; s < quotas[k]; ++s) {
        if (pools[c].empty()) c = draw_uniform_remaining(pools, rng);
        mine.push_back(pools[c].back());
        pools[c].pop_back();
      }
      std::sort(mine.begin(), mine.end());
    }
    return p;
  }

  const double shape = alpha / static_cast<double>(n_classes);
  std::gamma_distribution<double> gamma(shape, 1.0);
  std::vector<std::vector<double>> q(num_clients,
                                     std::vector<double>(n_classes));
  std::vector<bool> degenerate(num_clients, false);
  for (std::size_t k = 0; k < num_clients; ++k) {
    double total = 0.0;
    for (double& v : q[k]) total += (v = gamma(rng));
    if (total > 0.0) {
      for (double& v : q[k]) v /= total;
    } else {
      degenerate[k] = true;  // every draw underflowed
    }
  }

  // Clients draw one sample per pass so that pool depletion is shared
  // evenly instead of landing on the last clients.
  std::vector<double> live_q(n_classes);
  for (std::size_t k = 0; k < num_clients; ++k) p.clients[k].reserve(quotas[k]);
  for (std::size_t s = 0; s < quotas.front(); ++s) {
    for (std::size_t k = 0; k < num_clients; ++k) {
      if (s >= quotas[k]) continue;
      double live_mass = 0.0;
      if (!degenerate[k]) {
        for (std::size_t c = 0; c < n_classes; ++c) {
          live_q[c] = pools[c].empty() ? 0.0 : q[k][c];
          live_mass += live_q[c];
        }
      }
      const std::size_t c = live_mass > 0.0
                                ? draw_weighted(live_q, live_mass, rng)
                                : draw_uniform_remaining(pools, rng);
      p.clients[k].push_back(pools[c].back());
      pools[c].pop_back();
    }
  }
  for (auto& c : p.clients) std::sort(c.begin(), c.end());
  return p;
}

Partition partition_domain_split(const Dataset& data,
                                 std::size_t num_clients) {
  if (data.d_in < 1) {
    throw InvalidArgument("partition_domain_split: need a scalar feature");
  }
  auto order = all_indices(data.n);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return data.row(a)[0] < data.row(b)[0];
                   });
  return blocks(order, num_clients);
}

Partition partition_iid(std::size_t n, std::size_t num_clients,
                        std::uint64_t seed) {
  auto order = all_indices(n);
  Rng rng = make_rng(seed, Stream::kPartition);
  shuffle(order, rng);
  Partition p = blocks(order, num_clients);
  for (auto& c : p.clients) std::sort(c.begin(), c.end());
  return p;
}

std::string partition_to_json(const Partition& p) {
  nlohmann::json j = p.clients;
  return j.dump();
}

Partition partition_from_json(const std::string& text) {
  Partition p;
  try {
    p.clients = nlohmann::json::parse(text)
                    .get<std::vector<std::vector<std::size_t>>>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("partition json: ") + e.what());
  }
  p.validate(p.num_samples());
  return p;
}

}  // namespace ghbm
