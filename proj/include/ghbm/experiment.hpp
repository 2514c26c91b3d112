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

#ifndef GHBM_EXPERIMENT_HPP
#define GHBM_EXPERIMENT_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ghbm/engine.hpp"

namespace ghbm {

/// Values to take the Cartesian product over. An empty axis keeps the base
/// config's value.
struct SweepAxes {
  std::vector<std::size_t> tau;
  std::vector<double> participation;
  std::vector<double> beta;
  std::vector<double> alpha;
  std::vector<std::uint64_t> seed;

  bool empty() const noexcept {
    return tau.empty() && participation.empty() && beta.empty() &&
           alpha.empty() && seed.empty();
  }
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::filesystem::path output_dir = "out";  // absolute after loading
  RunConfig run;
  SweepAxes sweep;
  Metric summary_metric = Metric::kTestAccuracy;
};

/// Parses and validates a config document. Errors are ConfigError with a
/// "line N: " prefix. Relative paths resolve against `base_dir`.
ExperimentConfig parse_experiment(const std::string& text,
                                  const std::filesystem::path& base_dir);
ExperimentConfig load_experiment(const std::filesystem::path& path);

struct SweepCell {
  std::string tag;  // e.g. "tau5_seed1"; empty for the base cell
  RunConfig run;
  std::size_t tau = 0;
  double participation = 0.0;
  double beta = 0.0;
  double alpha = 0.0;
  std::uint64_t seed = 0;
};

/// Axes vary in the order tau, participation, beta, alpha, seed (seed
/// fastest). Cells that fail validation throw ConfigError naming the cell.
std::vector<SweepCell> expand_sweep(const ExperimentConfig& exp);

/// Columns: round, train_loss, test_loss, test_accuracy, deviation, bytes_cum.
std::string records_csv(std::span<const RoundRecord> records);
std::string manifest_json(const RunResult& result, const std::string& name);

/// Writes via a sibling temporary file and rename.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

/// Caps `requested` by the GHBM_THREADS environment variable when set.
int capped_threads(int requested);

std::string format_real(double v);

}  // namespace ghbm

#endif  // GHBM_EXPERIMENT_HPP
