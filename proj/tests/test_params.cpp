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

#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "ghbm/errors.hpp"
#include "ghbm/params.hpp"
#include "ghbm/rng.hpp"

using namespace ghbm;

TEST_CASE("zeros") {
  CHECK(zeros(3) == ParamVector{0, 0, 0});
  CHECK(zeros(1) == ParamVector{0});
  CHECK(norm_sq(zeros(5)) == 0.0);
  CHECK_THROWS_AS(zeros(0), InvalidDimension);
}

TEST_CASE("axpy") {
  CHECK(axpy(2, {1, 1}, {0, 1}) == ParamVector{2, 3});
  const ParamVector x{1.5, -2, 7}, y{3, 4, 5};
  CHECK(axpy(0, x, y) == y);
  CHECK(axpy(-1, x, x) == zeros(3));
  CHECK_THROWS_AS(axpy(1, {1, 2}, {1, 2, 3}), InvalidDimension);
}

TEST_CASE("reductions and elementwise ops") {
  CHECK(mean(std::vector<ParamVector>{{1, 2}, {3, 4}}) == ParamVector{2, 3});
  CHECK(norm_sq({3, 4}) == 25.0);
  const ParamVector x{0.1, 0.2, 0.3};
  CHECK(sub(x, x) == zeros(3));
  CHECK(dot({1, 2, 3}, {4, 5, 6}) == 32.0);
  CHECK(add({1, 2}, {3, 4}) == ParamVector{4, 6});
  CHECK(scale(-2, {1, 0.5}) == ParamVector{-2, -1});
  CHECK_THROWS_AS(mean(std::vector<ParamVector>{}), EmptyAggregate);
  CHECK_THROWS_AS(mean(std::vector<ParamVector>{{1}, {1, 2}}), InvalidDimension);
  CHECK_THROWS_AS(dot({1}, {1, 2}), InvalidDimension);
}

TEST_CASE("mean of a singleton is the identity") {
  const ParamVector x{0.1, 1.0 / 3.0, -7e-300};
  CHECK(mean(std::vector<ParamVector>{x}) == x);
}

TEST_CASE("scaling law for norm_sq") {
  Rng rng = make_rng(11, Stream::kVerify);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(1 + uniform_index(rng, 20));
    for (auto& e : v) e = 20.0 * uniform01(rng) - 10.0;
    const ParamVector x(v);
    const double a = 10.0 * uniform01(rng) - 5.0;
    const double lhs = norm_sq(scale(a, x));
    const double rhs = a * a * norm_sq(x);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("operations are pure") {
  const ParamVector x{1, 2, 3}, y{4, 5, 6};
  const ParamVector x0 = x, y0 = y;
  (void)axpy(3, x, y);
  (void)sub(x, y);
  (void)scale(2, x);
  (void)mean(std::vector<ParamVector>{x, y});
  CHECK(x == x0);
  CHECK(y == y0);
}

TEST_CASE("non-finite results are rejected") {
  const double big = std::numeric_limits<double>::max();
  CHECK_THROWS_AS(scale(10, {big}), NonFiniteValue);
  CHECK_THROWS_AS(add({big}, {big}), NonFiniteValue);
  CHECK_THROWS_AS(require_finite(ParamVector{std::nan("")}, "x"), NonFiniteValue);
}

TEST_CASE("reductions are left to right") {
  // Summing 1e16, 1, -1 in order loses the 1; pairing the small terms first
  // would not.
  const ParamVector x{1e8, 1, 1}, y{1e8, 1, -1};
  CHECK(dot(x, y) == (1e16 + 1.0) - 1.0);
}

TEST_CASE("max_relative_deviation") {
  CHECK(max_relative_deviation({1, 2}, {1, 2}) == 0.0);
  CHECK(max_relative_deviation({1, 2}, {1, 4}) == doctest::Approx(0.5));
  CHECK(max_relative_deviation({0}, {0}) == 0.0);
}
