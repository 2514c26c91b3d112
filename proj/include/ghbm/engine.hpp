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

#ifndef GHBM_ENGINE_HPP
#define GHBM_ENGINE_HPP

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ghbm/algorithms.hpp"
#include "ghbm/data.hpp"
#include "ghbm/probe.hpp"
#include "ghbm/sampling.hpp"
#include "ghbm/tasks.hpp"

namespace ghbm {

enum class TaskFamily { kQuadratic, kLogistic, kMlp };
enum class PartitionKind { kIid, kDirichlet, kDomain };

struct TaskSpec {
  TaskFamily family = TaskFamily::kLogistic;
  QuadraticSpec quadratic;
  // Classification generator.
  std::size_t n = 2000;
  std::size_t d_in = 10;
  std::size_t n_classes = 10;
  std::size_t hidden = 16;
  double cluster_spread = 1.0;
  double test_fraction = 0.2;
};

struct PartitionSpec {
  PartitionKind kind = PartitionKind::kIid;
  std::size_t num_clients = 10;
  double alpha = 0.0;
};

struct SamplerSpec {
  SamplerKind kind = SamplerKind::kUniform;
  double participation = 1.0;
};

struct RunConfig {
  TaskSpec task;
  PartitionSpec partition;
  SamplerSpec sampler;
  AlgoConfig algorithm;
  std::size_t rounds = 100;
  std::size_t batch_size = 32;  // 0 = full local batch
  std::size_t eval_every = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  std::vector<std::size_t> probe_taus;  // empty disables the deviation probe

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Stable text form of every field; hashing it identifies a run.
std::string canonical_config(const RunConfig& cfg);
std::uint64_t config_hash(const RunConfig& cfg);

struct RoundRecord {
  std::size_t round = 0;
  double train_loss = 0.0;
  std::optional<double> train_accuracy;
  std::optional<double> test_loss;
  std::optional<double> test_accuracy;
  std::optional<double> deviation;  // first probe tau, when available
  double bytes_cum = 0.0;
  std::size_t grad_evals_cum = 0;
};

struct RunResult {
  RunConfig config;  // replay metadata: the config and its seed suffice
  std::uint64_t config_hash = 0;
  std::vector<RoundRecord> records;
  std::vector<DeviationSample> deviations;  // every probe tau, every sample
  ParamVector final_model;
  double wall_seconds = 0.0;
};

/// Payload bytes of one model copy (float64 on the wire).
double model_bytes(std::size_t dim) noexcept;

/// One federated run, advanced a round at a time.
///
/// State transitions happen only in step(); client work for a round fans out
/// over an OpenMP team and the results are merged in ascending client id.
class Simulation {
 public:
  explicit Simulation(RunConfig cfg);

  /// Executes round `round() + 1`.
  void step();
  /// Evaluation record at the current round (does not advance).
  RoundRecord evaluate_now() const;

  std::size_t round() const noexcept { return server_.round; }
  const RunConfig& config() const noexcept { return cfg_; }
  const TaskKind& task() const noexcept { return task_; }
  const Dataset& train() const noexcept { return train_; }
  const Dataset& test() const noexcept { return test_; }
  const Partition& partition() const noexcept { return partition_; }
  const Sampler& sampler() const noexcept { return sampler_; }
  const ServerState& server() const noexcept { return server_; }
  const std::vector<ClientState>& client_states() const noexcept {
    return clients_;
  }
  std::vector<ClientState>& mutable_client_states() noexcept {
    return clients_;
  }
  const std::vector<DeviationSample>& deviations() const noexcept {
    return deviations_;
  }
  double bytes_cum() const noexcept { return bytes_cum_; }
  std::size_t grad_evals_cum() const noexcept { return grad_evals_cum_; }

  /// Runs the given clients for round `t` from the current server state
  /// without touching any state. threads <= 1 uses the serial reference.
  std::vector<ClientResult> run_clients(std::span<const std::size_t> ids,
                                        std::size_t t, int threads) const;
  std::vector<ClientResult> run_clients_serial(
      std::span<const std::size_t> ids, std::size_t t) const;
  std::vector<ClientResult> run_clients_parallel(
      std::span<const std::size_t> ids, std::size_t t, int threads) const;

  /// Per-client pseudo-gradients theta^{t-1} - theta_i^{t,J} of all K clients
  /// for the next round, computed offline.
  GradientInstance all_clients_pseudo_gradients() const;

 private:
  LocalProblem problem_for(std::size_t client) const;

  RunConfig cfg_;
  TaskKind task_;
  Dataset train_;
  Dataset test_;
  Partition partition_;
  Sampler sampler_;
  ServerState server_;
  std::vector<ClientState> clients_;
  std::deque<ParamVector> recent_pseudo_;  // newest last
  std::vector<DeviationSample> deviations_;
  std::optional<double> last_deviation_;
  double bytes_cum_ = 0.0;
  std::size_t grad_evals_cum_ = 0;
};

/// Runs all rounds; records at round 0, every eval_every rounds and at the
/// final round.
RunResult run(const RunConfig& cfg);

/// Centralised mini-batch SGD over the whole training set with the batch
/// stream a single client would see. Reference for the K = 1 reduction.
ParamVector centralized_sgd(const RunConfig& cfg);

enum class Metric { kTrainLoss, kTestLoss, kTestAccuracy };

bool higher_is_better(Metric m) noexcept;
std::optional<double> metric_value(const RoundRecord& r, Metric m);

/// Smallest evaluated round >= 1 whose metric reaches the target (>= for
/// accuracy, <= for losses); nullopt if it never does.
std::optional<std::size_t> rounds_to_target(const RunResult& result, Metric m,
                                            double target);

/// Mean metric over the last max(1, n / 10) evaluated rounds (round 0
/// excluded).
double final_quality(const RunResult& result, Metric m);

}  // namespace ghbm

#endif  // GHBM_ENGINE_HPP
