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

#include "ghbm/algorithms.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <utility>

#include "ghbm/errors.hpp"
#include "ghbm/rng.hpp"

namespace ghbm {

namespace {

constexpr std::array<std::pair<Algorithm, std::string_view>, 9> kNames{{
    {Algorithm::kFedAvg, "fedavg"},
    {Algorithm::kFedAvgM, "fedavgm"},
    {Algorithm::kFedProx, "fedprox"},
    {Algorithm::kFedCM, "fedcm"},
    {Algorithm::kScaffold, "scaffold"},
    {Algorithm::kGhbmPractical, "ghbm"},
    {Algorithm::kGhbmTheory, "ghbm_theory"},
    {Algorithm::kLocalGhbm, "localghbm"},
    {Algorithm::kFedHbm, "fedhbm"},
}};

}  // namespace

std::string algorithm_name(Algorithm a) {
  for (const auto& [kind, name] : kNames) {
    if (kind == a) return std::string(name);
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return std::tolower(ch); });
  for (const auto& [kind, n] : kNames) {
    if (n == lower) return kind;
  }
  return std::nullopt;
}

void AlgoConfig::validate() const {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw ConfigError("algorithm: beta must be in [0, 1]");
  }
  if (tau < 1) throw ConfigError("algorithm: tau must be >= 1");
  if (!(server_lr > 0.0)) throw ConfigError("algorithm: server_lr must be > 0");
  if (!(client_lr > 0.0)) throw ConfigError("algorithm: client_lr must be > 0");
  if (local_steps < 1) throw ConfigError("algorithm: local_steps must be >= 1");
  if (!(mu >= 0.0)) throw ConfigError("algorithm: mu must be >= 0");
  if (!(weight_decay >= 0.0)) {
    throw ConfigError("algorithm: weight_decay must be >= 0");
  }
}

std::size_t AlgoConfig::effective_tau() const noexcept {
  return kind == Algorithm::kFedCM ? 1 : tau;
}

bool AlgoConfig::uses_model_history() const noexcept {
  return kind == Algorithm::kFedCM || kind == Algorithm::kGhbmPractical;
}

ModelHistory::ModelHistory(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw InvalidArgument("model history: zero capacity");
}

void ModelHistory::push(std::size_t round, ParamVector theta) {
  if (!entries_.empty() && round != entries_.back().round + 1) {
    throw InvalidArgument("model history: rounds must be consecutive");
  }
  if (entries_.size() == capacity_) entries_.pop_front();
  entries_.push_back({round, std::move(theta)});
}

const HistoryEntry& ModelHistory::newest() const {
  if (entries_.empty()) throw InvalidArgument("model history: empty");
  return entries_.back();
}

const HistoryEntry& ModelHistory::oldest() const {
  if (entries_.empty()) throw InvalidArgument("model history: empty");
  return entries_.front();
}

const HistoryEntry* ModelHistory::find(std::size_t round) const {
  if (entries_.empty() || round < entries_.front().round ||
      round > entries_.back().round) {
    return nullptr;
  }
  return &entries_[round - entries_.front().round];
}

ServerState init_server_state(const AlgoConfig& cfg, ParamVector theta0) {
  cfg.validate();
  require_finite(theta0, "initial model");
  ServerState s;
  s.momentum = ParamVector(theta0.dim());
  s.last_pseudo_gradient = ParamVector(theta0.dim());
  if (cfg.uses_model_history()) {
    s.model_history = ModelHistory(cfg.effective_tau() + 1);
    s.model_history.push(0, theta0);
  }
  if (cfg.kind == Algorithm::kGhbmTheory) {
    // The auxiliary sequence starts at theta^0.
    s.bar_history = ModelHistory(cfg.tau + 1);
    s.bar_history.push(0, theta0);
  }
  if (cfg.kind == Algorithm::kScaffold) {
    s.server_control = ParamVector(theta0.dim());
  }
  s.theta = std::move(theta0);
  return s;
}

ParamVector hbm_moving_average(const ParamVector& m_prev, const ParamVector& g,
                               double beta) {
  return axpy(beta, m_prev, g);
}

ParamVector momentum_from_displacement(const ParamVector& recent,
                                       const ParamVector& past, double span,
                                       std::size_t local_steps) {
  require_same_dim(recent, past, "momentum_from_displacement");
  const double denom = span * static_cast<double>(local_steps);
  if (!(denom > 0.0)) {
    throw InvalidArgument("momentum_from_displacement: span * J must be > 0");
  }
  ParamVector m(recent.dim());
  for (std::size_t k = 0; k < m.dim(); ++k) m[k] = (recent[k] - past[k]) / denom;
  require_finite(m, "momentum_from_displacement");
  return m;
}

ParamVector ghbm_momentum(const ModelHistory& history, std::size_t tau,
                          std::size_t local_steps, std::size_t t) {
  if (history.empty()) throw InvalidArgument("ghbm_momentum: empty history");
  if (t < 1) throw InvalidArgument("ghbm_momentum: rounds start at 1");
  const HistoryEntry& latest = history.newest();
  if (latest.round != t - 1) {
    throw InvalidArgument("ghbm_momentum: history does not end at round t-1");
  }
  const std::size_t span = std::min(tau, t - 1);
  if (span == 0) return ParamVector(latest.theta.dim());
  const HistoryEntry* past = history.find(t - 1 - span);
  if (past == nullptr) {
    throw InvalidArgument("ghbm_momentum: history shorter than tau + 1");
  }
  return momentum_from_displacement(latest.theta, past->theta,
                                    static_cast<double>(span), local_steps);
}

BatchStream::BatchStream(std::span<const std::size_t> local,
                         std::size_t batch_size, std::uint64_t seed,
                         std::size_t client, std::size_t round)
    : order_(local.begin(), local.end()),
      batch_size_(batch_size),
      seed_(seed),
      client_(client),
      round_(round) {
  if (order_.empty()) throw InvalidArgument("batch stream: no local data");
  if (batch_size_ == 0 || batch_size_ >= order_.size()) {
    batch_size_ = 0;
  } else {
    reshuffle();
  }
}

void BatchStream::reshuffle() {
  Rng rng = make_rng(seed_, Stream::kBatch, {client_, round_, epoch_});
  shuffle(order_, rng);
  cursor_ = 0;
}

std::span<const std::size_t> BatchStream::next() {
  if (batch_size_ == 0) return order_;
  if (cursor_ >= order_.size()) {
    ++epoch_;
    reshuffle();
  }
  const std::size_t len = std::min(batch_size_, order_.size() - cursor_);
  std::span<const std::size_t> out(order_.data() + cursor_, len);
  cursor_ += len;
  return out;
}

ClientResult client_round(const AlgoConfig& cfg, const ServerState& server,
                          const ClientState& client, const LocalProblem& prob,
                          std::size_t round) {
  const std::size_t dim = server.theta.dim();
  const std::size_t J = cfg.local_steps;
  const double lr = cfg.client_lr;
  const double beta = cfg.beta;
  ParamVector theta(server.theta);
  BatchStream batches(prob.indices, prob.batch_size, prob.seed, prob.client,
                      round);

  // Round-constant terms, in parameter units (shift) or gradient units
  // (bias).
  ParamVector shift;
  ParamVector bias;
  std::size_t tau_i = 0;
  switch (cfg.kind) {
    case Algorithm::kFedCM:
    case Algorithm::kGhbmPractical:
      shift = scale(beta, server.momentum);
      break;
    case Algorithm::kLocalGhbm:
      if (client.has_storage()) {
        tau_i = round - *client.stored_round;
        shift = scale(beta, momentum_from_displacement(
                                server.theta, *client.stored_model,
                                static_cast<double>(tau_i), J));
      } else {
        shift = ParamVector(dim);
      }
      break;
    case Algorithm::kFedHbm:
      if (client.has_storage()) tau_i = round - *client.stored_round;
      break;
    case Algorithm::kScaffold: {
      const ParamVector c_i =
          client.client_control.empty() ? ParamVector(dim) : client.client_control;
      bias = sub(server.server_control, c_i);
      break;
    }
    case Algorithm::kGhbmTheory:
      bias = scale(1.0 - beta, server.momentum);
      break;
    default:
      break;
  }

  for (std::size_t j = 0; j < J; ++j) {
    ParamVector g = grad(*prob.task, theta, *prob.data, batches.next());
    if (cfg.weight_decay != 0.0) axpy_inplace(cfg.weight_decay, theta, g);
    switch (cfg.kind) {
      case Algorithm::kFedAvg:
      case Algorithm::kFedAvgM:
        for (std::size_t k = 0; k < dim; ++k) theta[k] = theta[k] - lr * g[k];
        break;
      case Algorithm::kFedProx:
        for (std::size_t k = 0; k < dim; ++k) {
          theta[k] =
              theta[k] - lr * (g[k] + cfg.mu * (theta[k] - server.theta[k]));
        }
        break;
      case Algorithm::kFedCM:
      case Algorithm::kGhbmPractical:
      case Algorithm::kLocalGhbm:
        for (std::size_t k = 0; k < dim; ++k) {
          theta[k] = theta[k] - lr * g[k] + shift[k];
        }
        break;
      case Algorithm::kFedHbm:
        if (tau_i > 0) {
          // Momentum from the current local iterate, recomputed every step.
          const ParamVector m = momentum_from_displacement(
              theta, *client.stored_model, static_cast<double>(tau_i), J);
          for (std::size_t k = 0; k < dim; ++k) {
            theta[k] = theta[k] - lr * g[k] + beta * m[k];
          }
        } else {
          for (std::size_t k = 0; k < dim; ++k) theta[k] = theta[k] - lr * g[k];
        }
        break;
      case Algorithm::kScaffold:
        for (std::size_t k = 0; k < dim; ++k) {
          theta[k] = theta[k] - lr * (g[k] + bias[k]);
        }
        break;
      case Algorithm::kGhbmTheory:
        for (std::size_t k = 0; k < dim; ++k) {
          theta[k] = theta[k] - lr * (beta * g[k] + bias[k]);
        }
        break;
    }
  }
  if (!theta.all_finite()) {
    throw NonFiniteValue("client " + std::to_string(prob.client) + " round " +
                         std::to_string(round) + ": local model diverged");
  }

  ClientResult out;
  out.client = prob.client;
  out.grad_evals = J;
  switch (cfg.kind) {
    case Algorithm::kLocalGhbm:
      out.new_state = localghbm_store(client, server.theta, round);
      break;
    case Algorithm::kFedHbm:
      out.new_state = fedhbm_store(client, theta, round);
      break;
    case Algorithm::kScaffold: {
      const ParamVector c_i =
          client.client_control.empty() ? ParamVector(dim) : client.client_control;
      ClientState next = client;
      next.client_control = scaffold_client_control_update(
          c_i, server.server_control, server.theta, theta, J, lr);
      out.control_delta = sub(next.client_control, c_i);
      out.new_state = std::move(next);
      break;
    }
    default:
      break;
  }
  out.theta_final = std::move(theta);
  return out;
}

namespace {

// (1 - eta) theta + eta * mean(theta_i): the model-average form of
// theta - eta * pseudo_gradient. With eta = 1 it returns the client average
// exactly.
ParamVector aggregate_step(const ParamVector& theta,
                           std::span<const ClientResult> results, double eta) {
  ParamVector avg(theta.dim());
  for (const auto& r : results) {
    for (std::size_t k = 0; k < avg.dim(); ++k) avg[k] += r.theta_final[k];
  }
  if (results.size() > 1) {
    const double inv = 1.0 / static_cast<double>(results.size());
    for (double& v : avg) v *= inv;
  }
  ParamVector next(theta.dim());
  for (std::size_t k = 0; k < next.dim(); ++k) {
    next[k] = (1.0 - eta) * theta[k] + eta * avg[k];
  }
  return next;
}

}  // namespace

ServerState server_update(const AlgoConfig& cfg, const ServerState& server,
                          std::span<const ClientResult> results,
                          std::size_t num_clients) {
  if (results.empty()) throw EmptyAggregate("server_update: no client results");
  for (const auto& r : results) {
    require_same_dim(server.theta, r.theta_final, "server_update");
  }
  const std::size_t t = server.round + 1;
  const double eta = cfg.server_lr;
  ServerState next = server;
  next.round = t;

  std::vector<ParamVector> deltas;
  deltas.reserve(results.size());
  for (const auto& r : results) deltas.push_back(sub(server.theta, r.theta_final));
  next.last_pseudo_gradient = mean(deltas);

  switch (cfg.kind) {
    case Algorithm::kFedAvgM: {
      // theta - eta (beta m + g) written as the FedAvg step minus eta beta m.
      ParamVector base = aggregate_step(server.theta, results, eta);
      axpy_inplace(-eta * cfg.beta, server.momentum, base);
      next.theta = std::move(base);
      next.momentum =
          hbm_moving_average(server.momentum, next.last_pseudo_gradient, cfg.beta);
      break;
    }
    case Algorithm::kGhbmTheory: {
      const double inv_lr_j =
          1.0 / (cfg.client_lr * static_cast<double>(cfg.local_steps));
      const ParamVector u = scale(inv_lr_j, next.last_pseudo_gradient);
      ParamVector bar = sub(server.theta, u);
      axpy_inplace(1.0 - cfg.beta, server.momentum, bar);
      const HistoryEntry* lag = server.bar_history.find(
          t >= cfg.tau ? t - cfg.tau : 0);
      const ParamVector& past = lag ? lag->theta : server.bar_history.oldest().theta;
      ParamVector m = scale(1.0 - cfg.beta, server.momentum);
      const ParamVector drift = sub(past, bar);
      axpy_inplace(1.0 / static_cast<double>(cfg.tau), drift, m);
      next.theta = axpy(-eta, m, server.theta);
      next.momentum = std::move(m);
      next.bar_history.push(t, std::move(bar));
      break;
    }
    default:
      next.theta = aggregate_step(server.theta, results, eta);
      break;
  }

  if (cfg.uses_model_history()) {
    next.model_history.push(t, next.theta);
    next.momentum = ghbm_momentum(next.model_history, cfg.effective_tau(),
                                  cfg.local_steps, t + 1);
  }
  if (cfg.kind == Algorithm::kScaffold) {
    std::vector<ParamVector> dc;
    dc.reserve(results.size());
    for (const auto& r : results) dc.push_back(r.control_delta);
    const double frac = static_cast<double>(results.size()) /
                        static_cast<double>(num_clients);
    next.server_control = axpy(frac, mean(dc), server.server_control);
  }
  if (!next.theta.all_finite() || !next.momentum.all_finite()) {
    throw NonFiniteValue("server update at round " + std::to_string(t) +
                         ": model diverged");
  }
  return next;
}

ParamVector scaffold_client_control_update(const ParamVector& c_i,
                                           const ParamVector& c,
                                           const ParamVector& theta_global,
                                           const ParamVector& theta_local,
                                           std::size_t local_steps,
                                           double client_lr) {
  const double denom = static_cast<double>(local_steps) * client_lr;
  if (!(denom > 0.0)) {
    throw InvalidArgument("scaffold control update: J * lr must be > 0");
  }
  require_same_dim(c_i, c, "scaffold control update");
  const ParamVector drift = sub(theta_global, theta_local);
  ParamVector out(c_i.dim());
  for (std::size_t k = 0; k < out.dim(); ++k) {
    out[k] = c_i[k] - c[k] + drift[k] / denom;
  }
  require_finite(out, "scaffold control update");
  return out;
}

ClientState fedhbm_store(const ClientState& state,
                         const ParamVector& theta_local_final, std::size_t t) {
  if (t < 1) throw InvalidArgument("fedhbm_store: rounds start at 1");
  ClientState next = state;
  next.stored_model = theta_local_final;
  next.stored_round = t;
  return next;
}

ClientState localghbm_store(const ClientState& state,
                            const ParamVector& theta_global_received,
                            std::size_t t) {
  if (t < 1) throw InvalidArgument("localghbm_store: rounds start at 1");
  ClientState next = state;
  next.stored_model = theta_global_received;
  next.stored_round = t;
  return next;
}

bool is_stateful(Algorithm a) noexcept {
  return a == Algorithm::kLocalGhbm || a == Algorithm::kFedHbm ||
         a == Algorithm::kScaffold;
}

double communication_overhead(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::kFedCM:
    case Algorithm::kGhbmPractical:
    case Algorithm::kGhbmTheory:
      return 1.5;
    case Algorithm::kScaffold:
      return 2.0;
    default:
      return 1.0;
  }
}

}  // namespace ghbm
