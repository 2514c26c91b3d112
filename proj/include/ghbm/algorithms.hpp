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

#ifndef GHBM_ALGORITHMS_HPP
#define GHBM_ALGORITHMS_HPP

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ghbm/params.hpp"
#include "ghbm/tasks.hpp"

namespace ghbm {

enum class Algorithm {
  kFedAvg,
  kFedAvgM,
  kFedProx,
  kFedCM,
  kScaffold,
  kGhbmPractical,
  kGhbmTheory,
  kLocalGhbm,
  kFedHbm,
};

std::string algorithm_name(Algorithm a);
/// Accepts the names produced by algorithm_name (case-insensitive).
std::optional<Algorithm> parse_algorithm(std::string_view name);

/// Algorithm choice plus the shared optimizer hyperparameters.
struct AlgoConfig {
  Algorithm kind = Algorithm::kFedAvg;
  double beta = 0.9;
  std::size_t tau = 1;
  double mu = 0.0;
  double server_lr = 1.0;
  double client_lr = 0.01;
  std::size_t local_steps = 1;
  double weight_decay = 0.0;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
  /// FedCM is the tau = 1 instance of the practical GHBM rule.
  std::size_t effective_tau() const noexcept;
  bool uses_model_history() const noexcept;
};

struct HistoryEntry {
  std::size_t round = 0;
  ParamVector theta;
};

/// Fixed-capacity ring buffer of models keyed by consecutive rounds.
class ModelHistory {
 public:
  ModelHistory() = default;
  explicit ModelHistory(std::size_t capacity);

  /// Appends the model for `round`; rounds must increase by exactly one.
  void push(std::size_t round, ParamVector theta);

  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  bool empty() const noexcept { return entries_.empty(); }
  const HistoryEntry& newest() const;
  const HistoryEntry& oldest() const;
  /// Entry for `round`, or nullptr if it has been evicted or never stored.
  const HistoryEntry* find(std::size_t round) const;

 private:
  std::size_t capacity_ = 0;
  std::deque<HistoryEntry> entries_;
};

struct ServerState {
  std::size_t round = 0;  // last completed round
  ParamVector theta;
  ParamVector momentum;
  ModelHistory model_history;
  ModelHistory bar_history;
  ParamVector server_control;
  ParamVector last_pseudo_gradient;
};

struct ClientState {
  std::optional<ParamVector> stored_model;
  std::optional<std::size_t> stored_round;
  ParamVector client_control;  // empty until first Scaffold participation

  bool has_storage() const noexcept { return stored_model.has_value(); }
};

ServerState init_server_state(const AlgoConfig& cfg, ParamVector theta0);

/// beta * m_prev + g.
ParamVector hbm_moving_average(const ParamVector& m_prev, const ParamVector& g,
                               double beta);

/// (recent - past) / (span * local_steps).
ParamVector momentum_from_displacement(const ParamVector& recent,
                                       const ParamVector& past, double span,
                                       std::size_t local_steps);

/// GHBM momentum for round t from the server model history:
/// (theta^{t-1} - theta^{t-s-1}) / (s * J) with s = min(tau, t - 1), and
/// zeros at t = 1. Throws InvalidArgument on an empty history or one that
/// does not end at round t - 1.
ParamVector ghbm_momentum(const ModelHistory& history, std::size_t tau,
                          std::size_t local_steps, std::size_t t);

/// Per-(client, round) mini-batch stream: shuffle the local indices with a
/// keyed seed and hand out consecutive slices, keeping a short final slice.
/// Running past the end reshuffles with the next epoch key. A batch size of
/// 0 yields the full local dataset every step.
class BatchStream {
 public:
  BatchStream(std::span<const std::size_t> local, std::size_t batch_size,
              std::uint64_t seed, std::size_t client, std::size_t round);
  std::span<const std::size_t> next();

 private:
  void reshuffle();

  std::vector<std::size_t> order_;
  std::size_t batch_size_;
  std::uint64_t seed_;
  std::size_t client_;
  std::size_t round_;
  std::size_t epoch_ = 0;
  std::size_t cursor_ = 0;
};

/// Everything a client needs to train locally.
struct LocalProblem {
  const TaskKind* task = nullptr;
  const Dataset* data = nullptr;
  std::span<const std::size_t> indices;
  std::size_t batch_size = 0;
  std::uint64_t seed = 0;
  std::size_t client = 0;
};

struct ClientResult {
  std::size_t client = 0;
  ParamVector theta_final;
  std::optional<ClientState> new_state;  // set by stateful algorithms
  ParamVector control_delta;             // Scaffold: c_i' - c_i
  std::size_t grad_evals = 0;
};

/// J local steps of the configured rule starting from server.theta. Reads
/// server and client state; writes nothing but the returned result.
ClientResult client_round(const AlgoConfig& cfg, const ServerState& server,
                          const ClientState& client, const LocalProblem& prob,
                          std::size_t round);

/// Aggregates one round. `results` must all come from server.theta;
/// num_clients is K (used by the Scaffold control update).
ServerState server_update(const AlgoConfig& cfg, const ServerState& server,
                          std::span<const ClientResult> results,
                          std::size_t num_clients);

/// Scaffold option II: c_i - c + (theta_global - theta_local) / (J * lr).
ParamVector scaffold_client_control_update(const ParamVector& c_i,
                                           const ParamVector& c,
                                           const ParamVector& theta_global,
                                           const ParamVector& theta_local,
                                           std::size_t local_steps,
                                           double client_lr);

/// FedHbm keeps the model it produced at the end of round t.
ClientState fedhbm_store(const ClientState& state,
                         const ParamVector& theta_local_final, std::size_t t);
/// LocalGhbm keeps the global model it received at round t.
ClientState localghbm_store(const ClientState& state,
                            const ParamVector& theta_global_received,
                            std::size_t t);

bool is_stateful(Algorithm a) noexcept;

/// Multiplier on FedAvg's per-round traffic.
double communication_overhead(Algorithm a) noexcept;

}  // namespace ghbm

#endif  // GHBM_ALGORITHMS_HPP
