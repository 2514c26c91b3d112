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

#include "ghbm/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ghbm/errors.hpp"
#include "ghbm/rng.hpp"

namespace ghbm {

void Dataset::validate() const {
  if (features.size() != n * d_in) {
    throw InvalidArgument("dataset: feature matrix is not n x d_in");
  }
  if (labels.size() != n) {
    throw InvalidArgument("dataset: label count differs from row count");
  }
  if (n_classes > 0) {
    for (double y : labels) {
      if (y < 0 || y != std::floor(y) ||
          y >= static_cast<double>(n_classes)) {
        throw InvalidArgument("dataset: label is not a valid class index");
      }
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.n = indices.size();
  out.d_in = d_in;
  out.n_classes = n_classes;
  out.features.reserve(out.n * d_in);
  out.labels.reserve(out.n);
  for (std::size_t i : indices) {
    if (i >= n) throw InvalidArgument("dataset: subset index out of range");
    auto r = row(i);
    out.features.insert(out.features.end(), r.begin(), r.end());
    out.labels.push_back(labels[i]);
  }
  return out;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_inputs(const TaskKind& kind, const ParamVector& theta,
                  const Dataset& data, std::span<const std::size_t> batch) {
  if (theta.dim() != param_dim(kind)) {
    throw InvalidDimension("task " + task_name(kind) + ": expected " +
                           std::to_string(param_dim(kind)) +
                           " parameters, got " + std::to_string(theta.dim()));
  }
  const std::size_t want_in = std::visit(
      Overloaded{[](const QuadraticRegression&) { return std::size_t{1}; },
                 [](const LogisticRegression& k) { return k.d_in; },
                 [](const Mlp& k) { return k.d_in; }},
      kind);
  if (data.d_in != want_in) {
    throw InvalidDimension("task " + task_name(kind) +
                           ": dataset feature width mismatch");
  }
  if (batch.empty()) throw InvalidArgument("batch: empty");
  for (std::size_t i : batch) {
    if (i >= data.n) throw InvalidArgument("batch: index out of range");
  }
}

// Softmax cross-entropy of `logits` against class y; writes probabilities
// into `probs` when non-empty.
double softmax_xent(std::span<const double> logits, std::size_t y,
                    std::span<double> probs) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - mx);
  const double log_z = mx + std::log(z);
  if (!probs.empty()) {
    for (std::size_t k = 0; k < logits.size(); ++k) {
      probs[k] = std::exp(logits[k] - log_z);
    }
  }
  return log_z - logits[y];
}

struct Scratch {
  std::vector<double> hidden;
  std::vector<double> logits;
  std::vector<double> probs;
  std::vector<double> dhidden;
};

void logistic_logits(const LogisticRegression& k, const ParamVector& theta,
                     std::span<const double> x, std::vector<double>& logits) {
  logits.assign(k.n_classes, 0.0);
  const double* w = theta.span().data();
  const double* b = w + k.n_classes * k.d_in;
  for (std::size_t c = 0; c < k.n_classes; ++c) {
    double acc = b[c];
    const double* wc = w + c * k.d_in;
    for (std::size_t j = 0; j < k.d_in; ++j) acc += wc[j] * x[j];
    logits[c] = acc;
  }
}

void mlp_forward(const Mlp& k, const ParamVector& theta,
                 std::span<const double> x, Scratch& s) {
  const double* w1 = theta.span().data();
  const double* b1 = w1 + k.hidden * k.d_in;
  const double* w2 = b1 + k.hidden;
  const double* b2 = w2 + k.n_classes * k.hidden;
  s.hidden.assign(k.hidden, 0.0);
  for (std::size_t h = 0; h < k.hidden; ++h) {
    double acc = b1[h];
    const double* wh = w1 + h * k.d_in;
    for (std::size_t j = 0; j < k.d_in; ++j) acc += wh[j] * x[j];
    s.hidden[h] = std::tanh(acc);
  }
  s.logits.assign(k.n_classes, 0.0);
  for (std::size_t c = 0; c < k.n_classes; ++c) {
    double acc = b2[c];
    const double* wc = w2 + c * k.hidden;
    for (std::size_t h = 0; h < k.hidden; ++h) acc += wc[h] * s.hidden[h];
    s.logits[c] = acc;
  }
}

double sample_loss(const TaskKind& kind, const ParamVector& theta,
                   const Dataset& data, std::size_t i, Scratch& s) {
  auto x = data.row(i);
  return std::visit(
      Overloaded{
          [&](const QuadraticRegression&) {
            const double xv = x[0];
            const double r =
                theta[0] * xv * xv + theta[1] * xv + theta[2] - data.labels[i];
            return 0.5 * r * r;
          },
          [&](const LogisticRegression& k) {
            logistic_logits(k, theta, x, s.logits);
            return softmax_xent(s.logits, data.label_class(i), {});
          },
          [&](const Mlp& k) {
            mlp_forward(k, theta, x, s);
            return softmax_xent(s.logits, data.label_class(i), {});
          }},
      kind);
}

// g += d loss_i / d theta
void accumulate_sample_grad(const TaskKind& kind, const ParamVector& theta,
                            const Dataset& data, std::size_t i, Scratch& s,
                            ParamVector& g) {
  auto x = data.row(i);
  std::visit(
      Overloaded{
          [&](const QuadraticRegression&) {
            const double xv = x[0];
            const double r =
                theta[0] * xv * xv + theta[1] * xv + theta[2] - data.labels[i];
            g[0] += r * xv * xv;
            g[1] += r * xv;
            g[2] += r;
          },
          [&](const LogisticRegression& k) {
            logistic_logits(k, theta, x, s.logits);
            s.probs.resize(k.n_classes);
            softmax_xent(s.logits, data.label_class(i), s.probs);
            s.probs[data.label_class(i)] -= 1.0;
            double* gw = g.span().data();
            double* gb = gw + k.n_classes * k.d_in;
            for (std::size_t c = 0; c < k.n_classes; ++c) {
              const double d = s.probs[c];
              double* gwc = gw + c * k.d_in;
              for (std::size_t j = 0; j < k.d_in; ++j) gwc[j] += d * x[j];
              gb[c] += d;
            }
          },
          [&](const Mlp& k) {
            mlp_forward(k, theta, x, s);
            s.probs.resize(k.n_classes);
            softmax_xent(s.logits, data.label_class(i), s.probs);
            s.probs[data.label_class(i)] -= 1.0;
            const double* w2 = theta.span().data() + k.hidden * k.d_in +
                               k.hidden;
            double* gw1 = g.span().data();
            double* gb1 = gw1 + k.hidden * k.d_in;
            double* gw2 = gb1 + k.hidden;
            double* gb2 = gw2 + k.n_classes * k.hidden;
            s.dhidden.assign(k.hidden, 0.0);
            for (std::size_t c = 0; c < k.n_classes; ++c) {
              const double d = s.probs[c];
              double* gw2c = gw2 + c * k.hidden;
              const double* w2c = w2 + c * k.hidden;
              for (std::size_t h = 0; h < k.hidden; ++h) {
                gw2c[h] += d * s.hidden[h];
                s.dhidden[h] += d * w2c[h];
              }
              gb2[c] += d;
            }
            for (std::size_t h = 0; h < k.hidden; ++h) {
              const double dz =
                  s.dhidden[h] * (1.0 - s.hidden[h] * s.hidden[h]);
              double* gw1h = gw1 + h * k.d_in;
              for (std::size_t j = 0; j < k.d_in; ++j) gw1h[j] += dz * x[j];
              gb1[h] += dz;
            }
          }},
      kind);
}

}  // namespace

std::size_t param_dim(const TaskKind& kind) {
  return std::visit(
      Overloaded{[](const QuadraticRegression&) { return std::size_t{3}; },
                 [](const LogisticRegression& k) {
                   return k.n_classes * (k.d_in + 1);
                 },
                 [](const Mlp& k) {
                   return k.hidden * (k.d_in + 1) +
                          k.n_classes * (k.hidden + 1);
                 }},
      kind);
}

std::string task_name(const TaskKind& kind) {
  return std::visit(
      Overloaded{[](const QuadraticRegression&) { return "quadratic"; },
                 [](const LogisticRegression&) { return "logistic"; },
                 [](const Mlp&) { return "mlp"; }},
      kind);
}

ParamVector init_params(const TaskKind& kind, std::uint64_t seed) {
  ParamVector theta = zeros(param_dim(kind));
  if (const auto* m = std::get_if<Mlp>(&kind)) {
    Rng rng = make_rng(seed, Stream::kInit);
    auto fill = [&](double* w, std::size_t fan_out, std::size_t fan_in) {
      const double s =
          std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      for (std::size_t k = 0; k < fan_in * fan_out; ++k) {
        w[k] = (2.0 * uniform01(rng) - 1.0) * s;
      }
    };
    double* w1 = theta.span().data();
    double* w2 = w1 + m->hidden * (m->d_in + 1);
    fill(w1, m->hidden, m->d_in);
    fill(w2, m->n_classes, m->hidden);
  }
  return theta;
}

double loss(const TaskKind& kind, const ParamVector& theta,
            const Dataset& data, std::span<const std::size_t> batch) {
  check_inputs(kind, theta, data, batch);
  Scratch s;
  double acc = 0.0;
  for (std::size_t i : batch) acc += sample_loss(kind, theta, data, i, s);
  return acc / static_cast<double>(batch.size());
}

ParamVector grad(const TaskKind& kind, const ParamVector& theta,
                 const Dataset& data, std::span<const std::size_t> batch) {
  check_inputs(kind, theta, data, batch);
  Scratch s;
  ParamVector g(theta.dim());
  for (std::size_t i : batch) accumulate_sample_grad(kind, theta, data, i, s, g);
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& v : g) v *= inv;
  return g;
}

ParamVector finite_diff_grad(const TaskKind& kind, const ParamVector& theta,
                             const Dataset& data,
                             std::span<const std::size_t> batch, double h) {
  if (!(h > 0.0)) {
    throw InvalidArgument("finite_diff_grad: step h must be > 0");
  }
  ParamVector g(theta.dim());
  ParamVector probe(theta);
  for (std::size_t k = 0; k < theta.dim(); ++k) {
    probe[k] = theta[k] + h;
    const double up = loss(kind, probe, data, batch);
    probe[k] = theta[k] - h;
    const double down = loss(kind, probe, data, batch);
    probe[k] = theta[k];
    g[k] = (up - down) / (2.0 * h);
  }
  return g;
}

std::size_t predict_class(const TaskKind& kind, const ParamVector& theta,
                          std::span<const double> x) {
  Scratch s;
  std::visit(Overloaded{[&](const QuadraticRegression&) {
                          throw InvalidArgument(
                              "predict_class: regression task");
                        },
                        [&](const LogisticRegression& k) {
                          logistic_logits(k, theta, x, s.logits);
                        },
                        [&](const Mlp& k) { mlp_forward(k, theta, x, s); }},
             kind);
  // max_element returns the first maximum: lowest index wins ties.
  return static_cast<std::size_t>(
      std::max_element(s.logits.begin(), s.logits.end()) - s.logits.begin());
}

Evaluation evaluate_serial(const TaskKind& kind, const ParamVector& theta,
                           const Dataset& data) {
  const auto idx = all_indices(data.n);
  check_inputs(kind, theta, data, idx);
  Scratch s;
  const bool classify = !std::holds_alternative<QuadraticRegression>(kind);
  double total = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.n; ++i) {
    total += sample_loss(kind, theta, data, i, s);
    if (classify && predict_class(kind, theta, data.row(i)) ==
                        data.label_class(i)) {
      ++correct;
    }
  }
  Evaluation ev;
  ev.loss = total / static_cast<double>(data.n);
  if (classify) {
    ev.accuracy = static_cast<double>(correct) / static_cast<double>(data.n);
  }
  return ev;
}

Evaluation evaluate(const TaskKind& kind, const ParamVector& theta,
                    const Dataset& data, int threads) {
  if (threads <= 1) return evaluate_serial(kind, theta, data);
  const auto idx = all_indices(data.n);
  check_inputs(kind, theta, data, idx);
  const bool classify = !std::holds_alternative<QuadraticRegression>(kind);
  std::vector<double> row_loss(data.n);
  std::vector<unsigned char> hit(data.n, 0);
  const auto n = static_cast<std::ptrdiff_t>(data.n);
#pragma omp parallel num_threads(threads)
  {
    Scratch s;
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto u = static_cast<std::size_t>(i);
      row_loss[u] = sample_loss(kind, theta, data, u, s);
      if (classify) {
        hit[u] = predict_class(kind, theta, data.row(u)) == data.label_class(u);
      }
    }
  }
  double total = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.n; ++i) {
    total += row_loss[i];
    correct += hit[i];
  }
  Evaluation ev;
  ev.loss = total / static_cast<double>(data.n);
  if (classify) {
    ev.accuracy = static_cast<double>(correct) / static_cast<double>(data.n);
  }
  return ev;
}

Dataset generate_quadratic_dataset(const QuadraticSpec& spec,
                                   std::uint64_t seed) {
  if (spec.n < 1) throw InvalidArgument("quadratic dataset: n must be >= 1");
  if (!(spec.x_low < spec.x_high)) {
    throw InvalidArgument("quadratic dataset: require x_low < x_high");
  }
  if (spec.noise_std < 0) {
    throw InvalidArgument("quadratic dataset: noise_std must be >= 0");
  }
  Dataset d;
  d.n = spec.n;
  d.d_in = 1;
  d.features.resize(spec.n);
  d.labels.resize(spec.n);
  Rng rng = make_rng(seed, Stream::kData);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double step =
      spec.n > 1 ? (spec.x_high - spec.x_low) / static_cast<double>(spec.n - 1)
                 : 0.0;
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double x = spec.n > 1 && i + 1 == spec.n
                         ? spec.x_high
                         : spec.x_low + static_cast<double>(i) * step;
    double y = spec.a * x * x + spec.b * x + spec.c;
    if (spec.noise_std > 0) y += spec.noise_std * noise(rng);
    d.features[i] = x;
    d.labels[i] = y;
  }
  return d;
}

Dataset generate_synthetic_classification(std::size_t n, std::size_t d_in,
                                          std::size_t n_classes,
                                          double cluster_spread,
                                          std::uint64_t seed) {
  if (n_classes < 2) {
    throw InvalidArgument("classification dataset: n_classes must be >= 2");
  }
  if (d_in < 1 || n < 1) {
    throw InvalidArgument("classification dataset: n and d_in must be >= 1");
  }
  if (cluster_spread < 0) {
    throw InvalidArgument("classification dataset: spread must be >= 0");
  }
  Rng rng = make_rng(seed, Stream::kData);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> means(n_classes * d_in);
  for (double& m : means) m = normal(rng);
  Dataset d;
  d.n = n;
  d.d_in = d_in;
  d.n_classes = n_classes;
  d.features.resize(n * d_in);
  d.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % n_classes;
    d.labels[i] = static_cast<double>(c);
    for (std::size_t j = 0; j < d_in; ++j) {
      d.features[i * d_in + j] =
          means[c * d_in + j] + cluster_spread * normal(rng);
    }
  }
  return d;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& data,
                                             double test_fraction,
                                             std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw InvalidArgument("train_test_split: fraction must be in [0, 1)");
  }
  const auto n_test = static_cast<std::size_t>(
      std::floor(test_fraction * static_cast<double>(data.n)));
  auto order = all_indices(data.n);
  Rng rng = make_rng(seed, Stream::kTestSplit);
  shuffle(order, rng);
  std::vector<unsigned char> is_test(data.n, 0);
  for (std::size_t k = 0; k < n_test; ++k) is_test[order[k]] = 1;
  std::vector<std::size_t> train_idx, test_idx;
  for (std::size_t i = 0; i < data.n; ++i) {
    (is_test[i] ? test_idx : train_idx).push_back(i);
  }
  return {data.subset(train_idx), data.subset(test_idx)};
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  for (std::size_t j = 0; j < data.d_in; ++j) out << 'x' << j << ',';
  out << "label\n";
  char buf[64];
  for (std::size_t i = 0; i < data.n; ++i) {
    for (double v : data.row(i)) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << buf << ',';
    }
    if (data.is_classification()) {
      out << data.label_class(i) << '\n';
    } else {
      std::snprintf(buf, sizeof buf, "%.17g", data.labels[i]);
      out << buf << '\n';
    }
  }
}

Dataset read_dataset_csv(std::istream& in, std::size_t n_classes) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("dataset csv: empty");
  const auto cols =
      static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (cols < 2) throw InvalidArgument("dataset csv: need features and label");
  Dataset d;
  d.d_in = cols - 1;
  d.n_classes = n_classes;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(ss, cell, ',')) {
      double v;
      try {
        std::size_t used = 0;
        v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw InvalidArgument("dataset csv line " + std::to_string(lineno) +
                              ": bad number '" + cell + "'");
      }
      (c < d.d_in ? d.features : d.labels).push_back(v);
      ++c;
    }
    if (c != cols) {
      throw InvalidArgument("dataset csv line " + std::to_string(lineno) +
                            ": wrong column count");
    }
    ++d.n;
  }
  d.validate();
  return d;
}

}  // namespace ghbm
