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

#include "ghbm/cost.hpp"

#include <cstdio>

#include "ghbm/errors.hpp"
#include "ghbm/sampling.hpp"

namespace ghbm {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::size_t work_until(const RunResult& r, std::size_t round) {
  std::size_t w = 0;
  for (const auto& rec : r.records) {
    if (rec.round > round) break;
    w = rec.grad_evals_cum;
  }
  return w;
}

}  // namespace

std::vector<CostEntry> cost_report(const std::map<std::string, RunResult>& results,
                                   Metric metric, std::optional<double> target) {
  const RunResult* baseline = nullptr;
  for (const auto& [label, r] : results) {
    if (r.config.algorithm.kind != Algorithm::kFedAvg) continue;
    if (baseline != nullptr) {
      throw InvalidArgument("cost_report: more than one FedAvg baseline");
    }
    baseline = &r;
  }
  if (baseline == nullptr) {
    throw InvalidArgument("cost_report: missing FedAvg baseline");
  }
  const double goal = target ? *target : final_quality(*baseline, metric);

  std::vector<CostEntry> out;
  for (const auto& [label, r] : results) {
    CostEntry e;
    e.label = label;
    e.algorithm = r.config.algorithm.kind;
    e.overhead = communication_overhead(e.algorithm);
    e.model_bytes = model_bytes(r.final_model.dim());
    e.participants = cohort_size(r.config.partition.num_clients,
                                 r.config.sampler.participation);
    e.rounds = r.config.rounds;
    const auto hit = rounds_to_target(r, metric, goal);
    e.reached = hit.has_value();
    e.rounds_to_target = hit ? *hit : e.rounds;
    e.bytes = e.overhead * 2.0 * e.model_bytes *
              static_cast<double>(e.participants) *
              static_cast<double>(e.rounds);
    e.speedup = static_cast<double>(e.rounds_to_target) /
                static_cast<double>(e.rounds);
    e.total_bytes = e.bytes * e.speedup;
    e.work_units = work_until(r, e.rounds_to_target);
    e.wall_seconds = r.wall_seconds;
    out.push_back(std::move(e));
  }
  double base_tb = 0.0;
  for (const auto& e : out) {
    if (e.algorithm == Algorithm::kFedAvg) base_tb = e.total_bytes;
  }
  for (auto& e : out) {
    e.reduction = base_tb > 0.0 ? 1.0 - e.total_bytes / base_tb : 0.0;
  }
  return out;
}

void write_cost_csv(std::ostream& out, std::span<const CostEntry> entries) {
  out << "label,algorithm,overhead,model_bytes,participants,rounds,"
         "rounds_to_target,reached,bytes,speedup,total_bytes,reduction,"
         "work_units,wall_seconds\n";
  for (const auto& e : entries) {
    out << e.label << ',' << algorithm_name(e.algorithm) << ','
        << num(e.overhead) << ',' << num(e.model_bytes) << ','
        << e.participants << ',' << e.rounds << ',' << e.rounds_to_target
        << ',' << (e.reached ? 1 : 0) << ',' << num(e.bytes) << ','
        << num(e.speedup) << ',' << num(e.total_bytes) << ','
        << num(e.reduction) << ',' << e.work_units << ','
        << num(e.wall_seconds) << '\n';
  }
}

void write_deviation_csv(std::ostream& out,
                         std::span<const DeviationSample> samples) {
  out << "round,tau,deviation,raw\n";
  for (const auto& s : samples) {
    out << s.round << ',' << s.tau << ',' << num(s.deviation) << ','
        << num(s.raw) << '\n';
  }
}

std::map<std::size_t, double> mean_deviation_by_tau(
    std::span<const DeviationSample> samples) {
  std::map<std::size_t, std::pair<double, std::size_t>> acc;
  for (const auto& s : samples) {
    auto& [sum, n] = acc[s.tau];
    sum += s.deviation;
    ++n;
  }
  std::map<std::size_t, double> out;
  for (const auto& [tau, p] : acc) {
    out[tau] = p.first / static_cast<double>(p.second);
  }
  return out;
}

}  // namespace ghbm
