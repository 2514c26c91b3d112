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

#include "ghbm/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <exception>
#include <sstream>

#include "ghbm/errors.hpp"

namespace ghbm {

namespace {

TaskKind make_task(const TaskSpec& spec) {
  switch (spec.family) {
    case TaskFamily::kQuadratic:
      return QuadraticRegression{};
    case TaskFamily::kLogistic:
      return LogisticRegression{spec.n_classes, spec.d_in};
    case TaskFamily::kMlp:
      return Mlp{spec.d_in, spec.hidden, spec.n_classes};
  }
  throw ConfigError("task: unknown family");
}

Dataset make_dataset(const TaskSpec& spec, std::uint64_t seed) {
  if (spec.family == TaskFamily::kQuadratic) {
    return generate_quadratic_dataset(spec.quadratic, seed);
  }
  return generate_synthetic_classification(spec.n, spec.d_in, spec.n_classes,
                                           spec.cluster_spread, seed);
}

Partition make_partition(const PartitionSpec& spec, const Dataset& train,
                         std::uint64_t seed) {
  switch (spec.kind) {
    case PartitionKind::kIid:
      return partition_iid(train.n, spec.num_clients, seed);
    case PartitionKind::kDirichlet:
      if (!train.is_classification()) {
        throw ConfigError("partition: dirichlet split needs class labels");
      }
      return partition_dirichlet(train.labels, train.n_classes,
                                 spec.num_clients, spec.alpha, seed);
    case PartitionKind::kDomain:
      return partition_domain_split(train, spec.num_clients);
  }
  throw ConfigError("partition: unknown kind");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void RunConfig::validate() const {
  algorithm.validate();
  if (rounds < 1) throw ConfigError("rounds: must be >= 1");
  if (eval_every < 1) throw ConfigError("eval_every: must be >= 1");
  if (threads < 1) throw ConfigError("threads: must be >= 1");
  if (partition.num_clients < 1) {
    throw ConfigError("partition.clients: must be >= 1");
  }
  if (!(partition.alpha >= 0.0)) {
    throw ConfigError("partition.alpha: must be >= 0");
  }
  if (!(task.test_fraction >= 0.0 && task.test_fraction < 1.0)) {
    throw ConfigError("task.test_fraction: must be in [0, 1)");
  }
  if (task.family != TaskFamily::kQuadratic) {
    if (task.n_classes < 2) throw ConfigError("task.n_classes: must be >= 2");
    if (task.d_in < 1) throw ConfigError("task.d_in: must be >= 1");
    if (task.family == TaskFamily::kMlp && task.hidden < 1) {
      throw ConfigError("task.hidden: must be >= 1");
    }
  }
  if (partition.kind == PartitionKind::kDirichlet &&
      task.family == TaskFamily::kQuadratic) {
    throw ConfigError("partition.kind: dirichlet needs a classification task");
  }
  for (std::size_t tau : probe_taus) {
    if (tau < 1) throw ConfigError("probe.taus: entries must be >= 1");
  }
  // Surfaces sampler errors (participation range, cyclic divisibility).
  Sampler(sampler.kind, partition.num_clients, sampler.participation, seed);
}

std::string canonical_config(const RunConfig& c) {
  std::ostringstream os;
  const auto& t = c.task;
  const auto& q = t.quadratic;
  const auto& a = c.algorithm;
  os << "task.family=" << static_cast<int>(t.family) << ";task.n=" << t.n
     << ";task.d_in=" << t.d_in << ";task.n_classes=" << t.n_classes
     << ";task.hidden=" << t.hidden << ";task.spread=" << fmt(t.cluster_spread)
     << ";task.test_fraction=" << fmt(t.test_fraction) << ";q.n=" << q.n
     << ";q.x_low=" << fmt(q.x_low) << ";q.x_high=" << fmt(q.x_high)
     << ";q.a=" << fmt(q.a) << ";q.b=" << fmt(q.b) << ";q.c=" << fmt(q.c)
     << ";q.noise=" << fmt(q.noise_std)
     << ";partition.kind=" << static_cast<int>(c.partition.kind)
     << ";partition.K=" << c.partition.num_clients
     << ";partition.alpha=" << fmt(c.partition.alpha)
     << ";sampler.kind=" << static_cast<int>(c.sampler.kind)
     << ";sampler.C=" << fmt(c.sampler.participation)
     << ";algo=" << algorithm_name(a.kind) << ";beta=" << fmt(a.beta)
     << ";tau=" << a.tau << ";mu=" << fmt(a.mu)
     << ";server_lr=" << fmt(a.server_lr) << ";client_lr=" << fmt(a.client_lr)
     << ";J=" << a.local_steps << ";wd=" << fmt(a.weight_decay)
     << ";rounds=" << c.rounds << ";batch=" << c.batch_size
     << ";eval_every=" << c.eval_every << ";seed=" << c.seed << ";probe=";
  for (std::size_t tau : c.probe_taus) os << tau << ',';
  // threads are deliberately absent: results do not depend on them.
  return os.str();
}

std::uint64_t config_hash(const RunConfig& cfg) {
  // FNV-1a, 64 bit.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_config(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double model_bytes(std::size_t dim) noexcept {
  return static_cast<double>(dim) * sizeof(double);
}

Simulation::Simulation(RunConfig cfg)
    : cfg_((cfg.validate(), std::move(cfg))),
      task_(make_task(cfg_.task)),
      sampler_(cfg_.sampler.kind, cfg_.partition.num_clients,
               cfg_.sampler.participation, cfg_.seed) {
  const Dataset full = make_dataset(cfg_.task, cfg_.seed);
  std::tie(train_, test_) =
      train_test_split(full, cfg_.task.test_fraction, cfg_.seed);
  partition_ = make_partition(cfg_.partition, train_, cfg_.seed);
  partition_.validate(train_.n);
  server_ = init_server_state(cfg_.algorithm, init_params(task_, cfg_.seed));
  clients_.resize(cfg_.partition.num_clients);
}

LocalProblem Simulation::problem_for(std::size_t client) const {
  LocalProblem p;
  p.task = &task_;
  p.data = &train_;
  p.indices = partition_.clients[client];
  p.batch_size = cfg_.batch_size;
  p.seed = cfg_.seed;
  p.client = client;
  return p;
}

std::vector<ClientResult> Simulation::run_clients_serial(
    std::span<const std::size_t> ids, std::size_t t) const {
  std::vector<ClientResult> out;
  out.reserve(ids.size());
  for (std::size_t id : ids) {
    try {
      out.push_back(client_round(cfg_.algorithm, server_, clients_[id],
                                 problem_for(id), t));
    } catch (const std::exception& e) {
      throw Error("round " + std::to_string(t) + ", client " +
                  std::to_string(id) + ": " + e.what());
    }
  }
  return out;
}

std::vector<ClientResult> Simulation::run_clients_parallel(
    std::span<const std::size_t> ids, std::size_t t, int threads) const {
  std::vector<ClientResult> out(ids.size());
  std::vector<std::string> errors(ids.size());
  const auto n = static_cast<std::ptrdiff_t>(ids.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    try {
      out[u] = client_round(cfg_.algorithm, server_, clients_[ids[u]],
                            problem_for(ids[u]), t);
    } catch (const std::exception& e) {
      errors[u] = e.what();
    }
  }
  for (std::size_t u = 0; u < ids.size(); ++u) {
    if (!errors[u].empty()) {
      throw Error("round " + std::to_string(t) + ", client " +
                  std::to_string(ids[u]) + ": " + errors[u]);
    }
  }
  return out;
}

std::vector<ClientResult> Simulation::run_clients(
    std::span<const std::size_t> ids, std::size_t t, int threads) const {
  if (threads <= 1 || ids.size() <= 1) return run_clients_serial(ids, t);
  return run_clients_parallel(ids, t, threads);
}

GradientInstance Simulation::all_clients_pseudo_gradients() const {
  const auto ids = all_indices(cfg_.partition.num_clients);
  const auto results = run_clients(ids, server_.round + 1, cfg_.threads);
  GradientInstance inst;
  inst.client_grads.reserve(results.size());
  for (const auto& r : results) {
    inst.client_grads.push_back(sub(server_.theta, r.theta_final));
  }
  return inst;
}

void Simulation::step() {
  const std::size_t t = server_.round + 1;
  const auto cohort = sampler_.sample(t);
  const bool probe_due = !cfg_.probe_taus.empty() &&
                         (t % cfg_.eval_every == 0 || t == cfg_.rounds);

  std::vector<ClientResult> results;
  std::optional<ParamVector> reference;
  if (probe_due) {
    // The hypothetical all-clients pass uses the same keyed streams, so the
    // cohort's results are a bitwise subset of it.
    const auto everyone = all_indices(cfg_.partition.num_clients);
    auto all = run_clients(everyone, t, cfg_.threads);
    std::vector<ParamVector> deltas;
    deltas.reserve(all.size());
    for (const auto& r : all) deltas.push_back(sub(server_.theta, r.theta_final));
    reference = mean(deltas);
    for (std::size_t id : cohort) results.push_back(std::move(all[id]));
  } else {
    results = run_clients(cohort, t, cfg_.threads);
  }

  server_ = server_update(cfg_.algorithm, server_, results,
                          cfg_.partition.num_clients);
  for (auto& r : results) {
    if (r.new_state) clients_[r.client] = std::move(*r.new_state);
    grad_evals_cum_ += r.grad_evals;
  }
  bytes_cum_ += communication_overhead(cfg_.algorithm.kind) * 2.0 *
                model_bytes(server_.theta.dim()) *
                static_cast<double>(cohort.size());

  if (!cfg_.probe_taus.empty()) {
    const std::size_t keep =
        *std::max_element(cfg_.probe_taus.begin(), cfg_.probe_taus.end());
    recent_pseudo_.push_back(server_.last_pseudo_gradient);
    while (recent_pseudo_.size() > keep) recent_pseudo_.pop_front();
  }
  last_deviation_.reset();
  if (reference) {
    for (std::size_t i = 0; i < cfg_.probe_taus.size(); ++i) {
      const std::size_t tau = cfg_.probe_taus[i];
      if (recent_pseudo_.size() < tau) continue;
      std::vector<ParamVector> window(recent_pseudo_.end() -
                                          static_cast<std::ptrdiff_t>(tau),
                                      recent_pseudo_.end());
      try {
        const auto s = deviation_probe(t, tau, window, *reference);
        deviations_.push_back(s);
        if (i == 0) last_deviation_ = s.deviation;
      } catch (const UndefinedProbe&) {
        // Zero reference (e.g. exact convergence): no sample this round.
      }
    }
  }
}

RoundRecord Simulation::evaluate_now() const {
  RoundRecord r;
  r.round = server_.round;
  const Evaluation tr = evaluate(task_, server_.theta, train_, cfg_.threads);
  r.train_loss = tr.loss;
  r.train_accuracy = tr.accuracy;
  if (test_.n > 0) {
    const Evaluation te = evaluate(task_, server_.theta, test_, cfg_.threads);
    r.test_loss = te.loss;
    r.test_accuracy = te.accuracy;
  }
  r.deviation = last_deviation_;
  r.bytes_cum = bytes_cum_;
  r.grad_evals_cum = grad_evals_cum_;
  return r;
}

RunResult run(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  Simulation sim(cfg);
  RunResult out;
  out.config = sim.config();
  out.config_hash = config_hash(cfg);
  out.records.push_back(sim.evaluate_now());
  for (std::size_t t = 1; t <= cfg.rounds; ++t) {
    sim.step();
    if (t % cfg.eval_every == 0 || t == cfg.rounds) {
      out.records.push_back(sim.evaluate_now());
    }
  }
  out.deviations = sim.deviations();
  out.final_model = sim.server().theta;
  out.wall_seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
  return out;
}

ParamVector centralized_sgd(const RunConfig& cfg) {
  const Simulation sim(cfg);
  const auto everything = all_indices(sim.train().n);
  ParamVector theta = sim.server().theta;
  const double lr = cfg.algorithm.client_lr;
  for (std::size_t t = 1; t <= cfg.rounds; ++t) {
    BatchStream batches(everything, cfg.batch_size, cfg.seed, 0, t);
    for (std::size_t j = 0; j < cfg.algorithm.local_steps; ++j) {
      ParamVector g = grad(sim.task(), theta, sim.train(), batches.next());
      if (cfg.algorithm.weight_decay != 0.0) {
        axpy_inplace(cfg.algorithm.weight_decay, theta, g);
      }
      for (std::size_t k = 0; k < theta.dim(); ++k) {
        theta[k] = theta[k] - lr * g[k];
      }
    }
  }
  return theta;
}

bool higher_is_better(Metric m) noexcept { return m == Metric::kTestAccuracy; }

std::optional<double> metric_value(const RoundRecord& r, Metric m) {
  switch (m) {
    case Metric::kTrainLoss:
      return r.train_loss;
    case Metric::kTestLoss:
      return r.test_loss;
    case Metric::kTestAccuracy:
      return r.test_accuracy;
  }
  return std::nullopt;
}

std::optional<std::size_t> rounds_to_target(const RunResult& result, Metric m,
                                            double target) {
  for (const auto& r : result.records) {
    if (r.round == 0) continue;
    const auto v = metric_value(r, m);
    if (!v) continue;
    if (higher_is_better(m) ? *v >= target : *v <= target) return r.round;
  }
  return std::nullopt;
}

double final_quality(const RunResult& result, Metric m) {
  std::vector<double> vals;
  for (const auto& r : result.records) {
    if (r.round == 0) continue;
    if (const auto v = metric_value(r, m)) vals.push_back(*v);
  }
  if (vals.empty()) throw EmptyAggregate("final_quality: no evaluated rounds");
  const std::size_t tail = std::max<std::size_t>(1, vals.size() / 10);
  double acc = 0.0;
  for (std::size_t i = vals.size() - tail; i < vals.size(); ++i) acc += vals[i];
  return acc / static_cast<double>(tail);
}

}  // namespace ghbm
