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

#ifndef GHBM_PARAMS_HPP
#define GHBM_PARAMS_HPP

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace ghbm {

/// Dense flat model parameter vector.
///
/// Every model, momentum buffer and control variate in the simulator is a
/// ParamVector. The dimension is fixed at construction; binary operations
/// require equal dimensions and throw InvalidDimension otherwise.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::size_t dim, double fill = 0.0);
  ParamVector(std::initializer_list<double> values);
  explicit ParamVector(std::vector<double> values);

  std::size_t dim() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  std::span<double> span() noexcept { return values_; }
  std::span<const double> span() const noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  bool all_finite() const noexcept;

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<double> values_;
};

ParamVector zeros(std::size_t dim);

// Pure operations. Results are checked for finiteness.
ParamVector axpy(double a, const ParamVector& x, const ParamVector& y);
ParamVector add(const ParamVector& x, const ParamVector& y);
ParamVector sub(const ParamVector& x, const ParamVector& y);
ParamVector scale(double a, const ParamVector& x);
double dot(const ParamVector& x, const ParamVector& y);
double norm_sq(const ParamVector& x);
ParamVector mean(std::span<const ParamVector> xs);

// In-place kernels for hot loops: y += a * x.
void axpy_inplace(double a, const ParamVector& x, ParamVector& y);

void require_same_dim(const ParamVector& x, const ParamVector& y,
                      const char* what);
void require_finite(const ParamVector& x, const char* what);

/// Largest |x_k - y_k| / max(|x_k|, |y_k|, floor) over coordinates.
double max_relative_deviation(const ParamVector& x, const ParamVector& y,
                              double floor = 1e-300);

}  // namespace ghbm

#endif  // GHBM_PARAMS_HPP
