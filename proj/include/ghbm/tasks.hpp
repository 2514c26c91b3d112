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

#ifndef GHBM_TASKS_HPP
#define GHBM_TASKS_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ghbm/params.hpp"

namespace ghbm {

/// Row-major feature matrix plus labels.
///
/// Regression datasets carry real targets and n_classes == 0. Classification
/// datasets store class indices in [0, n_classes) as exact doubles.
struct Dataset {
  std::size_t n = 0;
  std::size_t d_in = 0;
  std::size_t n_classes = 0;
  std::vector<double> features;
  std::vector<double> labels;

  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * d_in, d_in};
  }
  std::size_t label_class(std::size_t i) const {
    return static_cast<std::size_t>(labels[i]);
  }
  bool is_classification() const noexcept { return n_classes > 0; }

  /// Throws InvalidArgument if shapes or class labels are inconsistent.
  void validate() const;

  /// Rows selected by `indices`, in the given order.
  Dataset subset(std::span<const std::size_t> indices) const;
};

std::vector<std::size_t> all_indices(std::size_t n);

// Task kinds.

/// f(x) = a x^2 + b x + c fitted on scalar x; parameters are (a, b, c).
struct QuadraticRegression {
  friend bool operator==(const QuadraticRegression&,
                         const QuadraticRegression&) = default;
};

/// Multinomial logistic regression. Layout: W (n_classes x d_in), then b.
struct LogisticRegression {
  std::size_t n_classes = 2;
  std::size_t d_in = 1;
  friend bool operator==(const LogisticRegression&,
                         const LogisticRegression&) = default;
};

/// One tanh hidden layer then softmax. Layout: W1 (hidden x d_in), b1,
/// W2 (n_classes x hidden), b2.
struct Mlp {
  std::size_t d_in = 1;
  std::size_t hidden = 8;
  std::size_t n_classes = 2;
  friend bool operator==(const Mlp&, const Mlp&) = default;
};

using TaskKind = std::variant<QuadraticRegression, LogisticRegression, Mlp>;

std::size_t param_dim(const TaskKind& kind);
std::string task_name(const TaskKind& kind);

/// Initial parameters: zeros for the convex tasks, Glorot-uniform weights
/// and zero biases for the MLP.
ParamVector init_params(const TaskKind& kind, std::uint64_t seed);

/// Mean loss over the batch rows. Throws InvalidDimension on a theta of the
/// wrong size.
double loss(const TaskKind& kind, const ParamVector& theta,
            const Dataset& data, std::span<const std::size_t> batch);

/// Analytic gradient of `loss`, averaged over the batch.
ParamVector grad(const TaskKind& kind, const ParamVector& theta,
                 const Dataset& data, std::span<const std::size_t> batch);

/// Central differences, one coordinate at a time.
ParamVector finite_diff_grad(const TaskKind& kind, const ParamVector& theta,
                             const Dataset& data,
                             std::span<const std::size_t> batch, double h);

struct Evaluation {
  double loss = 0.0;
  std::optional<double> accuracy;
};

/// Full-dataset loss and, for classifiers, top-1 accuracy. Per-row work runs
/// on up to `threads` OpenMP threads; the sum is always left to right.
Evaluation evaluate(const TaskKind& kind, const ParamVector& theta,
                    const Dataset& data, int threads = 1);

/// Serial reference for `evaluate`.
Evaluation evaluate_serial(const TaskKind& kind, const ParamVector& theta,
                           const Dataset& data);

/// argmax with ties resolved to the lowest class index.
std::size_t predict_class(const TaskKind& kind, const ParamVector& theta,
                          std::span<const double> x);

// Generators.

struct QuadraticSpec {
  std::size_t n = 6400;
  double x_low = -10.0;
  double x_high = 10.0;
  double a = 10.0;
  double b = 5.0;
  double c = -1.0;
  double noise_std = 0.0;
};

/// Equally spaced x over [x_low, x_high], ascending; y = a x^2 + b x + c plus
/// optional Gaussian noise.
Dataset generate_quadratic_dataset(const QuadraticSpec& spec,
                                   std::uint64_t seed);

/// Balanced Gaussian clusters: sample i belongs to class i mod n_classes,
/// cluster means are standard normal and samples are mean + spread * N(0, I).
Dataset generate_synthetic_classification(std::size_t n, std::size_t d_in,
                                          std::size_t n_classes,
                                          double cluster_spread,
                                          std::uint64_t seed);

/// Seeded split into (train, test). Rows keep their original relative order.
std::pair<Dataset, Dataset> train_test_split(const Dataset& data,
                                             double test_fraction,
                                             std::uint64_t seed);

// CSV snapshots: header "x0,...,x{d-1},label"; first comment-free header line
// is required. Classification datasets write "label" as an integer.
void write_dataset_csv(std::ostream& out, const Dataset& data);
Dataset read_dataset_csv(std::istream& in, std::size_t n_classes);

}  // namespace ghbm

#endif  // GHBM_TASKS_HPP
