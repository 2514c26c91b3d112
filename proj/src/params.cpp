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

#include "ghbm/params.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ghbm/errors.hpp"

namespace ghbm {

ParamVector::ParamVector(std::size_t dim, double fill) : values_(dim, fill) {}

ParamVector::ParamVector(std::initializer_list<double> values)
    : values_(values) {}

ParamVector::ParamVector(std::vector<double> values)
    : values_(std::move(values)) {}

bool ParamVector::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

ParamVector zeros(std::size_t dim) {
  if (dim == 0) throw InvalidDimension("zeros: dimension must be >= 1");
  return ParamVector(dim, 0.0);
}

void require_same_dim(const ParamVector& x, const ParamVector& y,
                      const char* what) {
  if (x.dim() != y.dim()) {
    throw InvalidDimension(std::string(what) + ": dimension mismatch (" +
                           std::to_string(x.dim()) + " vs " +
                           std::to_string(y.dim()) + ")");
  }
}

void require_finite(const ParamVector& x, const char* what) {
  if (!x.all_finite()) {
    throw NonFiniteValue(std::string(what) + ": non-finite entry");
  }
}

ParamVector axpy(double a, const ParamVector& x, const ParamVector& y) {
  require_same_dim(x, y, "axpy");
  ParamVector out(y);
  axpy_inplace(a, x, out);
  require_finite(out, "axpy");
  return out;
}

ParamVector add(const ParamVector& x, const ParamVector& y) {
  return axpy(1.0, x, y);
}

ParamVector sub(const ParamVector& x, const ParamVector& y) {
  require_same_dim(x, y, "sub");
  ParamVector out(x.dim());
  for (std::size_t k = 0; k < x.dim(); ++k) out[k] = x[k] - y[k];
  require_finite(out, "sub");
  return out;
}

ParamVector scale(double a, const ParamVector& x) {
  ParamVector out(x.dim());
  for (std::size_t k = 0; k < x.dim(); ++k) out[k] = a * x[k];
  require_finite(out, "scale");
  return out;
}

double dot(const ParamVector& x, const ParamVector& y) {
  require_same_dim(x, y, "dot");
  double acc = 0.0;
  for (std::size_t k = 0; k < x.dim(); ++k) acc += x[k] * y[k];
  return acc;
}

double norm_sq(const ParamVector& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc;
}

ParamVector mean(std::span<const ParamVector> xs) {
  if (xs.empty()) throw EmptyAggregate("mean: empty list");
  ParamVector acc(xs.front().dim());
  for (const auto& x : xs) {
    require_same_dim(xs.front(), x, "mean");
    for (std::size_t k = 0; k < acc.dim(); ++k) acc[k] += x[k];
  }
  const double inv = 1.0 / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    for (double& v : acc) v *= inv;
  }
  require_finite(acc, "mean");
  return acc;
}

void axpy_inplace(double a, const ParamVector& x, ParamVector& y) {
  require_same_dim(x, y, "axpy_inplace");
  for (std::size_t k = 0; k < x.dim(); ++k) y[k] += a * x[k];
}

double max_relative_deviation(const ParamVector& x, const ParamVector& y,
                              double floor) {
  require_same_dim(x, y, "max_relative_deviation");
  double worst = 0.0;
  for (std::size_t k = 0; k < x.dim(); ++k) {
    const double denom = std::max({std::abs(x[k]), std::abs(y[k]), floor});
    const double diff = std::abs(x[k] - y[k]);
    if (diff == 0.0) continue;
    worst = std::max(worst, diff / denom);
  }
  return worst;
}

}  // namespace ghbm
