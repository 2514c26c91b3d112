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

#ifndef GHBM_COST_HPP
#define GHBM_COST_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ghbm/algorithms.hpp"
#include "ghbm/engine.hpp"
#include "ghbm/probe.hpp"

namespace ghbm {

/// One row of the communication/compute ledger.
struct CostEntry {
  std::string label;
  Algorithm algorithm = Algorithm::kFedAvg;
  double overhead = 1.0;       // multiplier on FedAvg's per-round bytes
  double model_bytes = 0.0;
  std::size_t participants = 0;  // m, clients per round
  std::size_t rounds = 0;        // T
  std::size_t rounds_to_target = 0;  // r_a, T when never reached
  bool reached = false;
  double bytes = 0.0;        // b_a, full-budget traffic
  double speedup = 0.0;      // s_a = r_a / T
  double total_bytes = 0.0;  // tb_a = b_a * s_a
  double reduction = 0.0;    // rtb_a = 1 - tb_a / tb_FedAvg
  // Simulated compute: client gradient evaluations up to r_a.
  std::size_t work_units = 0;
  double wall_seconds = 0.0;  // reported, never asserted
};

/// Builds the ledger. The baseline is the single FedAvg entry; its target is
/// `target` when given and otherwise FedAvg's own final quality on `metric`.
/// Throws InvalidArgument when no FedAvg result is present.
std::vector<CostEntry> cost_report(const std::map<std::string, RunResult>& results,
                                   Metric metric,
                                   std::optional<double> target = std::nullopt);

void write_cost_csv(std::ostream& out, std::span<const CostEntry> entries);
void write_deviation_csv(std::ostream& out,
                         std::span<const DeviationSample> samples);

/// Mean deviation per tau, ascending by tau.
std::map<std::size_t, double> mean_deviation_by_tau(
    std::span<const DeviationSample> samples);

}  // namespace ghbm

#endif  // GHBM_COST_HPP
