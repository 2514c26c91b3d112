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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "ghbm/errors.hpp"
#include "ghbm/experiment.hpp"
#include "json.hpp"

using namespace ghbm;
namespace fs = std::filesystem;

namespace {

const char* kBase = R"({
  "name": "unit",
  "output_dir": "results",
  "task": { "family": "logistic", "n": 300, "d_in": 4, "n_classes": 3 },
  "partition": { "kind": "dirichlet", "clients": 6, "alpha": 0.5 },
  "sampler": { "kind": "cyclic", "participation": 0.5 },
  "algorithm": { "name": "ghbm", "beta": 0.9, "tau": 2, "client_lr": 0.05, "local_steps": 2 },
  "rounds": 8,
  "batch_size": 8,
  "eval_every": 2,
  "seed": 4
})";

std::string with(const std::string& key_line, const std::string& extra) {
  std::string text = kBase;
  const auto at = text.find(key_line);
  REQUIRE(at != std::string::npos);
  text.insert(at, extra);
  return text;
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("a full config parses") {
  const ExperimentConfig e = parse_experiment(kBase, "/tmp/base");
  CHECK(e.name == "unit");
  CHECK(e.output_dir == fs::path("/tmp/base/results"));
  CHECK(e.run.task.family == TaskFamily::kLogistic);
  CHECK(e.run.partition.num_clients == 6);
  CHECK(e.run.sampler.kind == SamplerKind::kCyclic);
  CHECK(e.run.algorithm.kind == Algorithm::kGhbmPractical);
  CHECK(e.run.algorithm.tau == 2);
  CHECK(e.run.rounds == 8);
  CHECK(e.summary_metric == Metric::kTestAccuracy);
  CHECK(e.sweep.empty());
}

TEST_CASE("unknown keys are rejected with a line number") {
  const std::string text = with("  \"rounds\"", "  \"roundz\": 3,\n");
  CHECK_THROWS_WITH_AS(parse_experiment(text, "."),
                       doctest::Contains("line 8"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_experiment(text, "."),
                       doctest::Contains("roundz"), ConfigError);
  const std::string nested = with("\"beta\"", "\"betta\": 1, ");
  CHECK_THROWS_WITH_AS(parse_experiment(nested, "."),
                       doctest::Contains("line 7"), ConfigError);
}

TEST_CASE("invalid values point at their line") {
  std::string text = kBase;
  text.replace(text.find("\"participation\": 0.5"), 20, "\"participation\": 1.5");
  CHECK_THROWS_WITH_AS(parse_experiment(text, "."),
                       doctest::Contains("line 6"), ConfigError);
  text = kBase;
  text.replace(text.find("\"name\": \"ghbm\""), 14, "\"name\": \"adam\"");
  CHECK_THROWS_WITH_AS(parse_experiment(text, "."),
                       doctest::Contains("line 7"), ConfigError);
  text = kBase;
  text.replace(text.find("\"rounds\": 8"), 11, "\"rounds\": \"8\"");
  CHECK_THROWS_AS(parse_experiment(text, "."), ConfigError);
  CHECK_THROWS_WITH_AS(parse_experiment("{\n  \"name\": 1,,\n}", "."),
                       doctest::Contains("line 2"), ConfigError);
  CHECK_THROWS_AS(load_experiment("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("sweeps expand to the Cartesian product") {
  const std::string text =
      with("  \"rounds\"", "  \"sweep\": { \"tau\": [1, 2], \"seed\": [1, 2, 3] },\n");
  const ExperimentConfig e = parse_experiment(text, ".");
  const auto cells = expand_sweep(e);
  REQUIRE(cells.size() == 6);
  CHECK(cells[0].tag == "tau1_seed1");
  CHECK(cells[1].tag == "tau1_seed2");
  CHECK(cells[5].tag == "tau2_seed3");
  CHECK(cells[4].run.algorithm.tau == 2);
  CHECK(cells[4].run.seed == 2);

  const auto single = expand_sweep(parse_experiment(kBase, "."));
  REQUIRE(single.size() == 1);
  CHECK(single[0].tag.empty());

  const std::string bad =
      with("  \"rounds\"", "  \"sweep\": { \"participation\": [0.5, 0.0] },\n");
  CHECK_THROWS_AS(expand_sweep(parse_experiment(bad, ".")), ConfigError);
}

TEST_CASE("records csv is byte-identical on rerun") {
  const ExperimentConfig e = parse_experiment(kBase, ".");
  const std::string a = records_csv(run(e.run).records);
  const std::string b = records_csv(run(e.run).records);
  CHECK(a == b);
  CHECK(a.rfind("round,train_loss,test_loss,test_accuracy,deviation,bytes_cum\n", 0) == 0);
  std::size_t lines = 0;
  for (char c : a) lines += c == '\n';
  CHECK(lines == 1 + 8 / 2 + 1);
}

TEST_CASE("the manifest replays the run") {
  const ExperimentConfig e = parse_experiment(kBase, ".");
  const RunResult first = run(e.run);
  const auto manifest = nlohmann::json::parse(manifest_json(first, e.name));
  CHECK(manifest["name"] == "unit");
  CHECK(manifest["config_hash"].get<std::string>().size() == 16);
  const ExperimentConfig again = parse_experiment(manifest["config"].dump(), ".");
  const RunResult second = run(again.run);
  CHECK(second.config_hash == first.config_hash);
  CHECK(records_csv(second.records) == records_csv(first.records));
  CHECK(second.final_model == first.final_model);
}

TEST_CASE("atomic writes and number formatting") {
  const fs::path dir = fs::temp_directory_path() / "ghbm_experiment_test";
  fs::create_directories(dir);
  const fs::path p = dir / "x.csv";
  write_file_atomic(p, "a\n");
  write_file_atomic(p, "b\n");
  CHECK(read_all(p) == "b\n");
  CHECK_FALSE(fs::exists(dir / "x.csv.tmp"));
  fs::remove_all(dir);
  CHECK(format_real(0.1) == "0.10000000000000001");
  CHECK(format_real(2.0) == "2");
}

TEST_CASE("thread cap from the environment") {
  ::setenv("GHBM_THREADS", "2", 1);
  CHECK(capped_threads(8) == 2);
  CHECK(capped_threads(1) == 1);
  ::unsetenv("GHBM_THREADS");
  CHECK(capped_threads(8) == 8);
}

TEST_CASE("shipped configs load") {
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(fs::path(GHBM_SOURCE_DIR) / "configs")) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(expand_sweep(load_experiment(entry.path())));
    ++n;
  }
  CHECK(n >= 4);
}
