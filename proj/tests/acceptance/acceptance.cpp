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

// Acceptance checks for the simulator. Prints one PASS/FAIL line per
// criterion and exits non-zero if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ghbm/cost.hpp"
#include "ghbm/engine.hpp"
#include "ghbm/experiment.hpp"
#include "ghbm/probe.hpp"
#include "ghbm/rng.hpp"
#include "ghbm/verify.hpp"

using namespace ghbm;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

bool all_passed(const std::vector<PropertyResult>& rs, std::string& detail) {
  bool ok = true;
  for (const auto& r : rs) {
    if (!r.passed) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + r.property + ": " + r.detail;
    }
  }
  return ok;
}

Outcome form_equivalence() {
  Outcome o;
  const auto rs = verify_forms({});
  o.passed = all_passed(rs, o.detail);
  if (o.passed) o.detail = std::to_string(rs.size()) + " trajectories agree";
  return o;
}

RunConfig reduction_base() {
  RunConfig c;
  c.task.family = TaskFamily::kLogistic;
  c.task.n = 800;
  c.task.d_in = 6;
  c.task.n_classes = 4;
  c.partition.kind = PartitionKind::kDirichlet;
  c.partition.num_clients = 20;
  c.partition.alpha = 0.1;
  c.sampler.participation = 0.2;
  c.algorithm.client_lr = 0.05;
  c.algorithm.local_steps = 3;
  c.rounds = 30;
  c.batch_size = 16;
  c.eval_every = 5;
  c.seed = 17;
  return c;
}

RunConfig with_algorithm(RunConfig c, Algorithm kind, double beta,
                         std::size_t tau = 1) {
  c.algorithm.kind = kind;
  c.algorithm.beta = beta;
  c.algorithm.tau = tau;
  return c;
}

// Same models and metrics. Traffic is left out: it depends on the
// algorithm's overhead factor, not on the trajectory.
bool same_trajectory(const RunResult& a, const RunResult& b) {
  if (a.final_model != b.final_model || a.records.size() != b.records.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const RoundRecord& x = a.records[i];
    const RoundRecord& y = b.records[i];
    if (x.round != y.round || x.train_loss != y.train_loss ||
        x.test_loss != y.test_loss || x.test_accuracy != y.test_accuracy) {
      return false;
    }
  }
  return true;
}

bool same_run(const RunResult& a, const RunResult& b) {
  return a.final_model == b.final_model &&
         records_csv(a.records) == records_csv(b.records);
}

Outcome reduction_identities() {
  Outcome o;
  const RunConfig base = reduction_base();
  const RunResult fedavg = run(with_algorithm(base, Algorithm::kFedAvg, 0.9));
  std::vector<std::string> broken;
  if (!same_trajectory(run(with_algorithm(base, Algorithm::kGhbmPractical, 0.9, 1)),
                run(with_algorithm(base, Algorithm::kFedCM, 0.9)))) {
    broken.push_back("ghbm(tau=1) vs fedcm");
  }
  if (!same_trajectory(run(with_algorithm(base, Algorithm::kFedAvgM, 0.0)), fedavg)) {
    broken.push_back("fedavgm(beta=0)");
  }
  if (!same_trajectory(run(with_algorithm(base, Algorithm::kFedCM, 0.0)), fedavg)) {
    broken.push_back("fedcm(beta=0)");
  }
  RunConfig prox = with_algorithm(base, Algorithm::kFedProx, 0.9);
  prox.algorithm.mu = 0.0;
  if (!same_trajectory(run(prox), fedavg)) broken.push_back("fedprox(mu=0)");

  RunConfig one = with_algorithm(base, Algorithm::kFedAvg, 0.9);
  one.partition.kind = PartitionKind::kIid;
  one.partition.num_clients = 1;
  one.sampler.participation = 1.0;
  one.algorithm.local_steps = 1;
  one.algorithm.server_lr = 1.0;
  one.rounds = 200;
  if (run(one).final_model != centralized_sgd(one)) {
    broken.push_back("K=1 fedavg vs centralized sgd");
  }
  o.passed = broken.empty();
  for (const auto& b : broken) o.detail += (o.detail.empty() ? "" : ", ") + b;
  if (o.passed) o.detail = "5 identities hold bitwise";
  return o;
}

Outcome zero_deviation() {
  Outcome o;
  const auto rs = verify_zero_deviation({});
  o.passed = all_passed(rs, o.detail);
  if (o.passed) {
    for (const auto& r : rs) o.detail += (o.detail.empty() ? "" : "; ") + r.detail;
  }
  return o;
}

Outcome deviation_bound() {
  Outcome o;
  Rng rng = make_rng(2026, Stream::kVerify, {4});
  std::size_t checks = 0, failures = 0;
  double worst_ratio = 0.0;
  for (int inst_id = 0; inst_id < 100; ++inst_id) {
    // K in [2, 20], period p a divisor of K, C = 1/p.
    const std::size_t K = 2 + uniform_index(rng, 19);
    std::vector<std::size_t> periods;
    for (std::size_t p = 2; p <= K; ++p) {
      if (K % p == 0) periods.push_back(p);
    }
    const std::size_t p = periods[uniform_index(rng, periods.size())];
    const double alpha = uniform01(rng) < 0.5 ? 0.0 : 1.0;
    const GradientInstance inst =
        make_gradient_instance(K, 2 + uniform_index(rng, 4), alpha, rng());
    for (SamplerKind kind : {SamplerKind::kUniform, SamplerKind::kCyclic}) {
      for (std::size_t tau = 1; tau <= p; ++tau) {
        const BoundCheck b = lemma1_bound_check(
            inst, kind, 1.0 / static_cast<double>(p), tau, 1000, rng());
        ++checks;
        if (!b.holds) ++failures;
        if (b.rhs > 0.0) worst_ratio = std::max(worst_ratio, b.lhs / b.rhs);
      }
    }
  }
  o.passed = failures == 0;
  o.detail = std::to_string(checks) + " checks on 100 instances, " +
             std::to_string(failures) + " violations, max lhs/rhs " +
             fmt("%.3f", worst_ratio);
  return o;
}

RunConfig quadratic_base(std::uint64_t seed) {
  RunConfig c;
  c.task.family = TaskFamily::kQuadratic;
  c.partition.kind = PartitionKind::kDomain;
  c.partition.num_clients = 10;
  c.sampler.kind = SamplerKind::kCyclic;
  c.algorithm.local_steps = 2;
  c.algorithm.client_lr = 2e-4;
  c.algorithm.beta = 0.9;
  c.rounds = 2000;
  c.batch_size = 0;
  c.eval_every = 10;
  c.seed = seed;
  return c;
}

Outcome quadratic_ordering() {
  double ghbm = 0.0, full = 0.0, part = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RunConfig g = quadratic_base(seed);
    g.algorithm.kind = Algorithm::kGhbmPractical;
    g.algorithm.tau = 5;
    g.sampler.participation = 0.2;
    RunConfig f = quadratic_base(seed);
    f.algorithm.kind = Algorithm::kFedCM;
    f.sampler.participation = 1.0;
    RunConfig p = f;
    p.sampler.participation = 0.2;
    ghbm += final_quality(run(g), Metric::kTrainLoss) / 5.0;
    full += final_quality(run(f), Metric::kTrainLoss) / 5.0;
    part += final_quality(run(p), Metric::kTrainLoss) / 5.0;
  }
  Outcome o;
  o.passed = ghbm <= 1.2 * full && part >= 2.0 * full;
  o.detail = "train loss ghbm(tau=5) " + fmt("%.4g", ghbm) + ", fedcm full " +
             fmt("%.4g", full) + ", fedcm C=0.2 " + fmt("%.4g", part) +
             "; ghbm/full " + fmt("%.3f", ghbm / full) + ", partial/full " +
             fmt("%.3g", part / full);
  return o;
}

RunConfig pathological_logistic(std::uint64_t seed) {
  RunConfig c;
  c.task.family = TaskFamily::kLogistic;
  c.task.n = 2500;
  c.task.d_in = 10;
  c.task.n_classes = 10;
  c.task.cluster_spread = 1.5;
  c.partition.kind = PartitionKind::kDirichlet;
  c.partition.num_clients = 50;
  c.partition.alpha = 0.0;
  c.sampler.kind = SamplerKind::kUniform;
  c.sampler.participation = 0.2;
  c.algorithm.local_steps = 4;
  c.algorithm.client_lr = 0.002;
  c.algorithm.beta = 0.99;
  c.rounds = 100;
  c.batch_size = 16;
  c.eval_every = 5;
  c.seed = seed;
  return c;
}

Outcome tau_ablation() {
  double tau5 = 0.0, tau1 = 0.0, fedavg = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RunConfig c = pathological_logistic(seed);
    tau5 += final_quality(run(with_algorithm(c, Algorithm::kGhbmPractical, 0.99, 5)),
                          Metric::kTestAccuracy) / 5.0;
    tau1 += final_quality(run(with_algorithm(c, Algorithm::kGhbmPractical, 0.99, 1)),
                          Metric::kTestAccuracy) / 5.0;
    fedavg += final_quality(run(with_algorithm(c, Algorithm::kFedAvg, 0.99)),
                            Metric::kTestAccuracy) / 5.0;
  }
  Outcome o;
  o.passed = tau5 > tau1 && tau5 > fedavg;
  o.detail = "test accuracy tau=5 " + fmt("%.4f", tau5) + ", tau=1 " +
             fmt("%.4f", tau1) + ", fedavg " + fmt("%.4f", fedavg);
  return o;
}

RunConfig probe_run(double alpha, std::uint64_t seed) {
  RunConfig c;
  c.task.family = TaskFamily::kLogistic;
  c.task.n = 5000;
  c.task.d_in = 20;
  c.task.n_classes = 10;
  c.task.cluster_spread = 1.5;
  c.partition.kind = PartitionKind::kDirichlet;
  c.partition.num_clients = 50;
  c.partition.alpha = alpha;
  c.sampler.participation = 0.2;
  c.algorithm.kind = Algorithm::kGhbmPractical;
  c.algorithm.tau = 5;
  c.algorithm.client_lr = 0.01;
  c.algorithm.local_steps = 4;
  c.rounds = 100;
  c.batch_size = 16;
  c.eval_every = 5;
  c.seed = seed;
  c.probe_taus = {1, 2, 3, 5};
  return c;
}

std::map<std::size_t, double> seed_mean_deviation(double alpha) {
  std::map<std::size_t, double> acc;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (const auto& [tau, v] : mean_deviation_by_tau(run(probe_run(alpha, seed)).deviations)) {
      acc[tau] += v / 5.0;
    }
  }
  return acc;
}

Outcome deviation_trend() {
  const auto non_iid = seed_mean_deviation(0.0);
  const auto iid = seed_mean_deviation(10000.0);
  Outcome o;
  o.passed = non_iid.at(1) > non_iid.at(5) && iid.at(1) <= 10.0 * iid.at(5);
  o.detail = "non-iid tau=1 " + fmt("%.4g", non_iid.at(1)) + " tau=2 " +
             fmt("%.4g", non_iid.at(2)) + " tau=3 " + fmt("%.4g", non_iid.at(3)) +
             " tau=5 " + fmt("%.4g", non_iid.at(5)) + "; iid tau=1 " +
             fmt("%.4g", iid.at(1)) + " tau=5 " + fmt("%.4g", iid.at(5));
  return o;
}

RunResult ledger_row(Algorithm kind, std::size_t rounds, std::size_t hit) {
  RunResult r;
  r.config.algorithm.kind = kind;
  r.config.partition.num_clients = 100;
  r.config.sampler.participation = 0.1;
  r.config.rounds = rounds;
  r.final_model = ParamVector(1000);
  for (std::size_t t = 0; t <= rounds; t += 10) {
    RoundRecord rec;
    rec.round = t;
    rec.test_accuracy = t >= hit ? 0.8 : 0.5;
    r.records.push_back(rec);
  }
  return r;
}

Outcome cost_arithmetic() {
  // 1000 parameters of 8 bytes, 10 clients per round, both directions:
  // FedAvg moves 2 * 8000 * 10 = 160000 bytes per round.
  const std::map<std::string, RunResult> runs{
      {"fedavg", ledger_row(Algorithm::kFedAvg, 400, 400)},
      {"ghbm", ledger_row(Algorithm::kGhbmPractical, 400, 100)},
      {"scaffold", ledger_row(Algorithm::kScaffold, 400, 200)},
      {"fedcm", ledger_row(Algorithm::kFedCM, 400, 500)},
  };
  struct Expect {
    double tb, rtb;
  };
  const std::map<std::string, Expect> hand{
      {"fedavg", {64000000.0, 0.0}},
      {"ghbm", {24000000.0, 0.625}},      // 1.5 * 64e6 * 1/4
      {"scaffold", {64000000.0, 0.0}},    // 2 * 64e6 * 1/2
      {"fedcm", {96000000.0, -0.5}},      // never reached: r = T
  };
  Outcome o;
  o.passed = true;
  for (const auto& e : cost_report(runs, Metric::kTestAccuracy, 0.8)) {
    const Expect& x = hand.at(e.label);
    if (e.total_bytes != x.tb || e.reduction != x.rtb) {
      o.passed = false;
      o.detail += e.label + " tb " + fmt("%.17g", e.total_bytes) + " rtb " +
                  fmt("%.17g", e.reduction) + "; ";
    }
  }
  if (o.passed) o.detail = "4 ledger rows match exactly";
  return o;
}

Outcome gradient_correctness() {
  Outcome o;
  const auto rs = verify_gradients({});
  o.passed = all_passed(rs, o.detail);
  if (o.passed) {
    for (const auto& r : rs) o.detail += (o.detail.empty() ? "" : "; ") + r.detail;
  }
  return o;
}

Outcome determinism() {
  RunConfig c = probe_run(0.1, 3);
  c.rounds = 40;
  c.algorithm.kind = Algorithm::kScaffold;
  const RunResult a = run(c);
  const RunResult b = run(c);
  c.threads = 8;
  const RunResult p = run(c);
  RunConfig g = probe_run(0.1, 3);
  g.rounds = 40;
  const RunResult ga = run(g);
  g.threads = 8;
  const RunResult gp = run(g);
  Outcome o;
  std::string da, dp;
  {
    std::ostringstream x, y;
    write_deviation_csv(x, ga.deviations);
    write_deviation_csv(y, gp.deviations);
    da = x.str();
    dp = y.str();
  }
  o.passed = same_run(a, b) && same_run(a, p) && same_run(ga, gp) && da == dp;
  o.detail = o.passed ? "records, models and probe series identical for 1 and 8 workers"
                      : "runs differ";
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "form equivalence", 1.0, form_equivalence},
      {2, "reduction identities", 5.0, reduction_identities},
      {3, "zero deviation under cyclic sampling", 5.0, zero_deviation},
      {4, "deviation bound", 60.0, deviation_bound},
      {5, "quadratic ordering", 30.0, quadratic_ordering},
      {6, "tau ablation ordering", 120.0, tau_ablation},
      {7, "deviation trend", 120.0, deviation_trend},
      {8, "cost arithmetic", 1.0, cost_arithmetic},
      {9, "gradient correctness", 5.0, gradient_correctness},
      {10, "determinism", 30.0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.passed = false;
      o.detail = std::string("error: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_seconds;
    const bool ok = o.passed && in_time;
    if (!ok) ++failed;
    std::printf("%s criterion %d: %s (%s) [%.2f s of %.0f s%s]\n", ok ? "PASS" : "FAIL",
                c.id, c.name, o.detail.c_str(), secs, c.budget_seconds,
                in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%zu of %zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
