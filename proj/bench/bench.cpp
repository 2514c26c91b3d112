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

// Serial references against the OpenMP kernels: one round of client work
// and a full-dataset evaluation, timed over a few repeats.
//
//   ghbm_bench [threads] [repeats]

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>

#include "ghbm/engine.hpp"
#include "ghbm/tasks.hpp"

using namespace ghbm;

namespace {

double best_of(int repeats, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const std::chrono::duration<double> d = std::chrono::steady_clock::now() - start;
    best = std::min(best, d.count());
  }
  return best;
}

void report(const char* what, double serial, double parallel, bool same) {
  std::printf("%-22s serial %9.4f s  parallel %9.4f s  speedup %5.2fx  %s\n", what,
              serial, parallel, serial / parallel, same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const int threads = argc > 1 ? std::atoi(argv[1]) : omp_get_max_threads();
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 3;

  RunConfig c;
  c.task.family = TaskFamily::kMlp;
  c.task.n = 20000;
  c.task.d_in = 32;
  c.task.n_classes = 10;
  c.task.hidden = 64;
  c.partition.kind = PartitionKind::kDirichlet;
  c.partition.num_clients = 100;
  c.partition.alpha = 0.3;
  c.algorithm.kind = Algorithm::kGhbmPractical;
  c.algorithm.tau = 5;
  c.algorithm.local_steps = 10;
  c.batch_size = 32;
  c.seed = 1;
  const Simulation sim(c);
  std::printf("workers %d, repeats %d, %zu parameters, %zu clients\n", threads,
              repeats, sim.server().theta.dim(), c.partition.num_clients);

  std::vector<std::size_t> ids(c.partition.num_clients);
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  std::vector<ClientResult> rs, rp;
  const double cs = best_of(repeats, [&] { rs = sim.run_clients_serial(ids, 1); });
  const double cp =
      best_of(repeats, [&] { rp = sim.run_clients_parallel(ids, 1, threads); });
  bool same = rs.size() == rp.size();
  for (std::size_t i = 0; same && i < rs.size(); ++i) {
    same = rs[i].theta_final == rp[i].theta_final;
  }
  report("client round", cs, cp, same);

  Evaluation es, ep;
  const double evs = best_of(repeats, [&] {
    es = evaluate_serial(sim.task(), sim.server().theta, sim.train());
  });
  const double evp = best_of(repeats, [&] {
    ep = evaluate(sim.task(), sim.server().theta, sim.train(), threads);
  });
  report("evaluation", evs, evp, es.loss == ep.loss && es.accuracy == ep.accuracy);
  return 0;
}
