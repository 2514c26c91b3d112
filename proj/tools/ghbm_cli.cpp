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

// Command-line front end: run, sweep, probe and verify.

#include <cmath>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "CLI11.hpp"
#include "ghbm/cost.hpp"
#include "ghbm/errors.hpp"
#include "ghbm/experiment.hpp"
#include "ghbm/verify.hpp"

namespace fs = std::filesystem;
using namespace ghbm;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kBadConfig = 2;

std::string stem_for(const ExperimentConfig& exp, const SweepCell& cell) {
  return cell.tag.empty() ? exp.name : exp.name + "_" + cell.tag;
}

std::vector<std::size_t> default_probe_taus(double participation) {
  const auto p = static_cast<std::size_t>(std::llround(1.0 / participation));
  std::set<std::size_t> taus{1, 2, std::max<std::size_t>(1, p / 2),
                             std::max<std::size_t>(1, p)};
  return {taus.begin(), taus.end()};
}

struct Options {
  std::string config;
  int threads = 0;  // 0 keeps the config value
};

ExperimentConfig load(const Options& o) {
  auto exp = load_experiment(o.config);
  if (o.threads > 0) exp.run.threads = o.threads;
  exp.run.threads = capped_threads(exp.run.threads);
  return exp;
}

RunResult run_cell(const ExperimentConfig& exp, SweepCell& cell) {
  cell.run.threads = exp.run.threads;
  const RunResult r = run(cell.run);
  const fs::path base = exp.output_dir / stem_for(exp, cell);
  write_file_atomic(fs::path(base) += ".csv", records_csv(r.records));
  write_file_atomic(fs::path(base) += ".manifest.json",
                    manifest_json(r, stem_for(exp, cell)));
  return r;
}

int cmd_run(const Options& o) {
  const auto exp = load(o);
  for (auto& cell : expand_sweep(exp)) {
    const auto r = run_cell(exp, cell);
    std::cout << stem_for(exp, cell) << ": " << r.records.size()
              << " records, final train_loss "
              << format_real(r.records.back().train_loss) << '\n';
  }
  return kOk;
}

int cmd_sweep(const Options& o) {
  const auto exp = load(o);
  auto cells = expand_sweep(exp);
  using Key = std::tuple<std::size_t, double, double, double>;
  std::map<Key, std::vector<double>> groups;
  for (auto& cell : cells) {
    const auto r = run_cell(exp, cell);
    const double q = final_quality(r, exp.summary_metric);
    groups[{cell.tau, cell.participation, cell.beta, cell.alpha}].push_back(q);
    std::cout << stem_for(exp, cell) << ": final quality " << format_real(q)
              << '\n';
  }
  if (exp.sweep.empty()) return kOk;

  static const char* metric_names[] = {"train_loss", "test_loss",
                                       "test_accuracy"};
  std::ostringstream csv;
  csv << "tau,participation,beta,alpha,seeds,metric,mean,std\n";
  for (const auto& [key, vals] : groups) {
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    const double sd =
        vals.size() > 1 ? std::sqrt(var / static_cast<double>(vals.size() - 1))
                        : 0.0;
    csv << std::get<0>(key) << ',' << format_real(std::get<1>(key)) << ','
        << format_real(std::get<2>(key)) << ',' << format_real(std::get<3>(key))
        << ',' << vals.size() << ','
        << metric_names[static_cast<int>(exp.summary_metric)] << ','
        << format_real(mean) << ',' << format_real(sd) << '\n';
  }
  write_file_atomic(exp.output_dir / (exp.name + "_summary.csv"), csv.str());
  return kOk;
}

int cmd_probe(const Options& o) {
  auto exp = load(o);
  if (exp.run.probe_taus.empty()) {
    exp.run.probe_taus = default_probe_taus(exp.run.sampler.participation);
  }
  for (auto& cell : expand_sweep(exp)) {
    cell.run.threads = exp.run.threads;
    const RunResult r = run(cell.run);
    std::ostringstream csv;
    write_deviation_csv(csv, r.deviations);
    const std::string stem = stem_for(exp, cell);
    write_file_atomic(exp.output_dir / (stem + "_deviation.csv"), csv.str());
    std::cout << stem << ":\n";
    for (const auto& [tau, m] : mean_deviation_by_tau(r.deviations)) {
      std::cout << "  tau " << tau << "  mean deviation " << format_real(m)
                << '\n';
    }
  }
  return kOk;
}

int cmd_verify() {
  const auto results = verify_all({});
  print_verify_table(std::cout, results);
  std::size_t failed = 0;
  for (const auto& r : results) {
    if (!r.passed) {
      ++failed;
      std::cerr << "failing property: " << r.suite << " / " << r.property
                << '\n';
    }
  }
  std::cout << (failed == 0 ? "all properties hold\n" : "verification failed\n");
  return failed == 0 ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated learning simulator with generalized heavy-ball momentum"};
  app.require_subcommand(1);
  Options opts;

  auto add_config = [&opts](CLI::App* sub) {
    sub->add_option("config", opts.config, "experiment config (JSON)")->required();
    sub->add_option("--threads", opts.threads,
                    "worker threads (capped by GHBM_THREADS)")
        ->check(CLI::PositiveNumber);
  };
  auto* run_cmd = app.add_subcommand("run", "run the configured experiment");
  add_config(run_cmd);
  auto* sweep_cmd =
      app.add_subcommand("sweep", "run every sweep cell and summarize over seeds");
  add_config(sweep_cmd);
  auto* probe_cmd =
      app.add_subcommand("probe", "record the tau-window deviation series");
  add_config(probe_cmd);
  auto* verify_cmd = app.add_subcommand("verify", "run the built-in property suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadConfig;
  }

  try {
    if (*run_cmd) return cmd_run(opts);
    if (*sweep_cmd) return cmd_sweep(opts);
    if (*probe_cmd) return cmd_probe(opts);
    if (*verify_cmd) return cmd_verify();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << opts.config << ": " << e.what() << '\n';
    return kBadConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
