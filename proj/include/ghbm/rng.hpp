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

#ifndef GHBM_RNG_HPP
#define GHBM_RNG_HPP

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace ghbm {

using Rng = std::mt19937_64;

// Stream namespaces. Every random draw in a run comes from a stream keyed by
// (master seed, namespace, ...indices), so replaying one round or running the
// probe never advances a shared generator.
enum class Stream : std::uint64_t {
  kData = 1,
  kTestSplit = 2,
  kPartition = 3,
  kSampler = 4,
  kCyclicOrder = 5,
  kBatch = 6,
  kInit = 7,
  kBoundCheck = 8,
  kVerify = 9,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed derived from the master seed and an ordered list of keys.
std::uint64_t derive_seed(std::uint64_t master, Stream stream,
                          std::initializer_list<std::uint64_t> keys = {});

Rng make_rng(std::uint64_t master, Stream stream,
             std::initializer_list<std::uint64_t> keys = {});

/// Uniform integer in [0, n) without relying on distribution internals.
std::size_t uniform_index(Rng& rng, std::size_t n);

/// Uniform real in [0, 1) built from the top 53 bits.
double uniform01(Rng& rng);

/// Fisher-Yates shuffle with uniform_index.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = uniform_index(rng, i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace ghbm

#endif  // GHBM_RNG_HPP
