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

#include <map>
#include <sstream>
#include <string>

#include "doctest.h"
#include "ghbm/cost.hpp"
#include "ghbm/errors.hpp"

using namespace ghbm;

namespace {

// Loss falls by one per round from `rounds`, so a target of `rounds - r`
// is first met at round r.
RunResult synthetic(Algorithm kind, std::size_t rounds, std::size_t dim) {
  RunResult r;
  r.config.algorithm.kind = kind;
  r.config.partition.num_clients = 10;
  r.config.sampler.participation = 0.2;
  r.config.rounds = rounds;
  r.final_model = ParamVector(dim);
  for (std::size_t t = 0; t <= rounds; ++t) {
    RoundRecord rec;
    rec.round = t;
    rec.train_loss = static_cast<double>(rounds - t);
    rec.grad_evals_cum = 8 * t;
    r.records.push_back(rec);
  }
  return r;
}

// Shifts the series so the target is met at round `hit` instead.
RunResult reaching_at(Algorithm kind, std::size_t rounds, std::size_t hit,
                      double target) {
  RunResult r = synthetic(kind, rounds, 10);
  for (auto& rec : r.records) {
    rec.train_loss = rec.round >= hit ? target : target + 1.0;
  }
  return r;
}

const CostEntry& find(const std::vector<CostEntry>& v, const std::string& label) {
  for (const auto& e : v) {
    if (e.label == label) return e;
  }
  FAIL("missing label " << label);
  return v.front();
}

}  // namespace

TEST_CASE("FedAvg against itself") {
  std::map<std::string, RunResult> runs{
      {"fedavg", reaching_at(Algorithm::kFedAvg, 30, 30, 1.0)}};
  const auto rep = cost_report(runs, Metric::kTrainLoss, 1.0);
  REQUIRE(rep.size() == 1);
  const CostEntry& e = rep.front();
  // 10 parameters of 8 bytes, 2 clients per round, both directions.
  CHECK(e.model_bytes == 80.0);
  CHECK(e.participants == 2);
  CHECK(e.bytes == 2.0 * 80.0 * 2.0 * 30.0);
  CHECK(e.speedup == 1.0);
  CHECK(e.total_bytes == e.bytes);
  CHECK(e.reduction == 0.0);
  CHECK(e.reached);
}

TEST_CASE("overheads and rounds to target") {
  const double target = 1.0;
  std::map<std::string, RunResult> runs{
      {"fedavg", reaching_at(Algorithm::kFedAvg, 30, 30, target)},
      {"scaffold", reaching_at(Algorithm::kScaffold, 30, 30, target)},
      {"ghbm", reaching_at(Algorithm::kGhbmPractical, 30, 10, target)},
      {"ghbm_quarter", reaching_at(Algorithm::kGhbmPractical, 40, 10, target)},
      {"never", reaching_at(Algorithm::kFedProx, 30, 31, target)},
  };
  const auto rep = cost_report(runs, Metric::kTrainLoss, target);
  const double base = 2.0 * 80.0 * 2.0 * 30.0;  // tb of FedAvg

  const CostEntry& sc = find(rep, "scaffold");
  CHECK(sc.overhead == 2.0);
  CHECK(sc.total_bytes == 2.0 * base);
  CHECK(sc.reduction == -1.0);

  const CostEntry& gh = find(rep, "ghbm");
  CHECK(gh.overhead == 1.5);
  CHECK(gh.rounds_to_target == 10);
  CHECK(gh.speedup == 10.0 / 30.0);
  CHECK(gh.total_bytes == 1.5 * base * (10.0 / 30.0));
  CHECK(gh.reduction == doctest::Approx(0.5).epsilon(1e-15));

  // 40 rounds at 1.5x, reached after a quarter: 1.5 * (4/3) * 1/4 = 0.5.
  const CostEntry& q = find(rep, "ghbm_quarter");
  CHECK(q.speedup == 0.25);
  CHECK(q.bytes == 1.5 * 2.0 * 80.0 * 2.0 * 40.0);
  CHECK(q.total_bytes == 0.5 * base);
  CHECK(q.reduction == 0.5);
  CHECK(q.work_units == 80);

  const CostEntry& nv = find(rep, "never");
  CHECK_FALSE(nv.reached);
  CHECK(nv.rounds_to_target == 30);
  CHECK(nv.reduction == 0.0);
}

TEST_CASE("default target is FedAvg's final quality") {
  std::map<std::string, RunResult> runs{
      {"fedavg", synthetic(Algorithm::kFedAvg, 20, 4)},
      {"ghbm", synthetic(Algorithm::kGhbmPractical, 20, 4)},
  };
  // Tail of 2 evaluations: mean of losses 1 and 0 is 0.5, first met at 20.
  const auto rep = cost_report(runs, Metric::kTrainLoss);
  CHECK(find(rep, "fedavg").rounds_to_target == 20);
  CHECK(find(rep, "ghbm").reduction == -0.5);
}

TEST_CASE("baseline must be unique") {
  std::map<std::string, RunResult> none{
      {"ghbm", synthetic(Algorithm::kGhbmPractical, 5, 2)}};
  CHECK_THROWS_AS(cost_report(none, Metric::kTrainLoss), InvalidArgument);
  std::map<std::string, RunResult> two{
      {"a", synthetic(Algorithm::kFedAvg, 5, 2)},
      {"b", synthetic(Algorithm::kFedAvg, 5, 2)}};
  CHECK_THROWS_AS(cost_report(two, Metric::kTrainLoss), InvalidArgument);
}

TEST_CASE("csv emitters") {
  std::map<std::string, RunResult> runs{
      {"fedavg", reaching_at(Algorithm::kFedAvg, 4, 2, 1.0)}};
  std::ostringstream cost;
  write_cost_csv(cost, cost_report(runs, Metric::kTrainLoss, 1.0));
  const std::string text = cost.str();
  CHECK(text.find("label") == 0);
  CHECK(text.find("\nfedavg,") != std::string::npos);

  const std::vector<DeviationSample> s{{1, 1, 0.5, 2.0}, {1, 5, 0.25, 1.0},
                                       {2, 1, 1.5, 6.0}};
  std::ostringstream dev;
  write_deviation_csv(dev, s);
  CHECK(dev.str() == "round,tau,deviation,raw\n1,1,0.5,2\n1,5,0.25,1\n2,1,1.5,6\n");
  const auto by_tau = mean_deviation_by_tau(s);
  CHECK(by_tau.at(1) == 1.0);
  CHECK(by_tau.at(5) == 0.25);
}
