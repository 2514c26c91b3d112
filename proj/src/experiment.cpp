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

#include "ghbm/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "ghbm/errors.hpp"
#include "json.hpp"

namespace ghbm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Path = std::vector<std::string>;

std::string dotted(const Path& path) {
  std::string s;
  for (const auto& p : path) {
    if (!s.empty()) s += '.';
    s += p;
  }
  return s.empty() ? "<root>" : s;
}

// nlohmann::json keeps no source positions, so keys are located by scanning
// for each path component in order. Good enough to point a human at a line.
class Locator {
 public:
  explicit Locator(const std::string& text) : text_(text) {}

  std::size_t line_of_offset(std::size_t offset) const {
    offset = std::min(offset, text_.size());
    return 1 + static_cast<std::size_t>(
                   std::count(text_.begin(),
                              text_.begin() + static_cast<std::ptrdiff_t>(offset),
                              '\n'));
  }

  std::size_t line_of(const Path& path) const {
    std::size_t pos = 0;
    for (const auto& key : path) {
      const auto hit = text_.find('"' + key + '"', pos);
      if (hit == std::string::npos) break;
      pos = hit + 1;
    }
    return line_of_offset(pos);
  }

  [[noreturn]] void fail(const Path& path, const std::string& msg) const {
    throw ConfigError("line " + std::to_string(line_of(path)) + ": " +
                      dotted(path) + ": " + msg);
  }

 private:
  const std::string& text_;
};

class Reader {
 public:
  Reader(const Locator& loc, const json& j, Path path,
         std::initializer_list<const char*> allowed)
      : loc_(loc), j_(j), path_(std::move(path)) {
    if (!j_.is_object()) loc_.fail(path_, "expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j_.items()) {
      if (!ok.count(key)) loc_.fail(at(key), "unknown key");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& raw(const char* key) const { return j_.at(key); }
  Path at(const std::string& key) const {
    Path p = path_;
    p.push_back(key);
    return p;
  }
  const Locator& locator() const { return loc_; }

  void size(const char* key, std::size_t& out) const {
    if (!has(key)) return;
    out = to_size(j_.at(key), at(key));
  }
  void u64(const char* key, std::uint64_t& out) const {
    if (!has(key)) return;
    out = to_u64(j_.at(key), at(key));
  }
  void real(const char* key, double& out) const {
    if (!has(key)) return;
    out = to_real(j_.at(key), at(key));
  }
  void integer(const char* key, int& out) const {
    if (!has(key)) return;
    const auto v = to_size(j_.at(key), at(key));
    if (v > static_cast<std::size_t>(std::numeric_limits<int>::max())) {
      loc_.fail(at(key), "value too large");
    }
    out = static_cast<int>(v);
  }
  std::optional<std::string> text(const char* key) const {
    if (!has(key)) return std::nullopt;
    const auto& v = j_.at(key);
    if (!v.is_string()) loc_.fail(at(key), "expected a string");
    return v.get<std::string>();
  }

  std::size_t to_size(const json& v, const Path& p) const {
    if (!v.is_number_unsigned()) {
      loc_.fail(p, "expected a non-negative integer");
    }
    return v.get<std::size_t>();
  }
  std::uint64_t to_u64(const json& v, const Path& p) const {
    if (!v.is_number_unsigned()) {
      loc_.fail(p, "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }
  double to_real(const json& v, const Path& p) const {
    if (!v.is_number()) loc_.fail(p, "expected a number");
    return v.get<double>();
  }

  template <typename T, typename F>
  std::vector<T> list(const char* key, F convert) const {
    std::vector<T> out;
    if (!has(key)) return out;
    const auto& v = j_.at(key);
    if (!v.is_array()) loc_.fail(at(key), "expected an array");
    for (const auto& e : v) out.push_back((this->*convert)(e, at(key)));
    return out;
  }

 private:
  const Locator& loc_;
  const json& j_;
  Path path_;
};

template <typename E>
E pick(const Reader& r, const char* key, E fallback,
       std::initializer_list<std::pair<const char*, E>> names) {
  const auto v = r.text(key);
  if (!v) return fallback;
  for (const auto& [n, e] : names) {
    if (*v == n) return e;
  }
  std::string options;
  for (const auto& [n, e] : names) {
    options += options.empty() ? "" : ", ";
    options += n;
  }
  r.locator().fail(r.at(key), "unknown value '" + *v + "' (expected one of " +
                                  options + ")");
}

constexpr std::initializer_list<std::pair<const char*, TaskFamily>> kFamilies = {
    {"quadratic", TaskFamily::kQuadratic},
    {"logistic", TaskFamily::kLogistic},
    {"mlp", TaskFamily::kMlp}};
constexpr std::initializer_list<std::pair<const char*, PartitionKind>>
    kPartitions = {{"iid", PartitionKind::kIid},
                   {"dirichlet", PartitionKind::kDirichlet},
                   {"domain", PartitionKind::kDomain}};
constexpr std::initializer_list<std::pair<const char*, SamplerKind>> kSamplers =
    {{"uniform", SamplerKind::kUniform}, {"cyclic", SamplerKind::kCyclic}};
constexpr std::initializer_list<std::pair<const char*, Metric>> kMetrics = {
    {"train_loss", Metric::kTrainLoss},
    {"test_loss", Metric::kTestLoss},
    {"test_accuracy", Metric::kTestAccuracy}};

template <typename E>
std::string name_of(E e, std::initializer_list<std::pair<const char*, E>> names) {
  for (const auto& [n, v] : names) {
    if (v == e) return n;
  }
  return "?";
}

void read_task(const Reader& parent, TaskSpec& t) {
  if (!parent.has("task")) return;
  const Reader r(parent.locator(), parent.raw("task"), parent.at("task"),
                 {"family", "n", "d_in", "n_classes", "hidden",
                  "cluster_spread", "test_fraction", "quadratic"});
  t.family = pick(r, "family", t.family, kFamilies);
  r.size("n", t.n);
  r.size("d_in", t.d_in);
  r.size("n_classes", t.n_classes);
  r.size("hidden", t.hidden);
  r.real("cluster_spread", t.cluster_spread);
  r.real("test_fraction", t.test_fraction);
  if (r.has("quadratic")) {
    const Reader q(r.locator(), r.raw("quadratic"), r.at("quadratic"),
                   {"n", "x_low", "x_high", "a", "b", "c", "noise_std"});
    q.size("n", t.quadratic.n);
    q.real("x_low", t.quadratic.x_low);
    q.real("x_high", t.quadratic.x_high);
    q.real("a", t.quadratic.a);
    q.real("b", t.quadratic.b);
    q.real("c", t.quadratic.c);
    q.real("noise_std", t.quadratic.noise_std);
  }
}

void read_algorithm(const Reader& parent, AlgoConfig& a) {
  if (!parent.has("algorithm")) return;
  const Reader r(parent.locator(), parent.raw("algorithm"),
                 parent.at("algorithm"),
                 {"name", "beta", "tau", "mu", "server_lr", "client_lr",
                  "local_steps", "weight_decay"});
  if (const auto n = r.text("name")) {
    const auto kind = parse_algorithm(*n);
    if (!kind) r.locator().fail(r.at("name"), "unknown algorithm '" + *n + "'");
    a.kind = *kind;
  }
  r.real("beta", a.beta);
  r.size("tau", a.tau);
  r.real("mu", a.mu);
  r.real("server_lr", a.server_lr);
  r.real("client_lr", a.client_lr);
  r.size("local_steps", a.local_steps);
  r.real("weight_decay", a.weight_decay);
}

// Maps a validation failure back to a line by guessing the field from the
// message prefix ("rounds: ...", "partition.clients: ...").
[[noreturn]] void fail_validation(const Locator& loc, const std::string& what) {
  Path p;
  const auto colon = what.find(':');
  if (colon != std::string::npos) {
    std::stringstream ss(what.substr(0, colon));
    std::string part;
    while (std::getline(ss, part, '.')) {
      if (part.find(' ') != std::string::npos) {
        p.clear();
        break;
      }
      p.push_back(part);
    }
  }
  throw ConfigError("line " + std::to_string(loc.line_of(p)) + ": " + what);
}

json task_json(const TaskSpec& t) {
  return {{"family", name_of(t.family, kFamilies)},
          {"n", t.n},
          {"d_in", t.d_in},
          {"n_classes", t.n_classes},
          {"hidden", t.hidden},
          {"cluster_spread", t.cluster_spread},
          {"test_fraction", t.test_fraction},
          {"quadratic",
           {{"n", t.quadratic.n},
            {"x_low", t.quadratic.x_low},
            {"x_high", t.quadratic.x_high},
            {"a", t.quadratic.a},
            {"b", t.quadratic.b},
            {"c", t.quadratic.c},
            {"noise_std", t.quadratic.noise_std}}}};
}

json run_json(const RunConfig& c) {
  const auto& a = c.algorithm;
  return {{"task", task_json(c.task)},
          {"partition",
           {{"kind", name_of(c.partition.kind, kPartitions)},
            {"clients", c.partition.num_clients},
            {"alpha", c.partition.alpha}}},
          {"sampler",
           {{"kind", name_of(c.sampler.kind, kSamplers)},
            {"participation", c.sampler.participation}}},
          {"algorithm",
           {{"name", algorithm_name(a.kind)},
            {"beta", a.beta},
            {"tau", a.tau},
            {"mu", a.mu},
            {"server_lr", a.server_lr},
            {"client_lr", a.client_lr},
            {"local_steps", a.local_steps},
            {"weight_decay", a.weight_decay}}},
          {"rounds", c.rounds},
          {"batch_size", c.batch_size},
          {"eval_every", c.eval_every},
          {"seed", c.seed},
          {"threads", c.threads},
          {"probe", {{"taus", c.probe_taus}}}};
}

json optional_real(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ExperimentConfig parse_experiment(const std::string& text,
                                  const fs::path& base_dir) {
  const Locator loc(text);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("line " + std::to_string(loc.line_of_offset(e.byte)) +
                      ": malformed JSON: " + e.what());
  }
  const Reader r(loc, doc, {},
                 {"$schema", "name", "output_dir", "task", "partition",
                  "sampler", "algorithm", "rounds", "batch_size", "eval_every",
                  "seed", "threads", "probe", "sweep", "summary_metric"});

  ExperimentConfig exp;
  RunConfig& c = exp.run;
  if (const auto n = r.text("name")) exp.name = *n;
  if (const auto o = r.text("output_dir")) exp.output_dir = *o;
  exp.output_dir = (base_dir / exp.output_dir).lexically_normal();

  read_task(r, c.task);
  if (r.has("partition")) {
    const Reader p(loc, r.raw("partition"), r.at("partition"),
                   {"kind", "clients", "alpha"});
    c.partition.kind = pick(p, "kind", c.partition.kind, kPartitions);
    p.size("clients", c.partition.num_clients);
    p.real("alpha", c.partition.alpha);
  }
  if (r.has("sampler")) {
    const Reader s(loc, r.raw("sampler"), r.at("sampler"),
                   {"kind", "participation"});
    c.sampler.kind = pick(s, "kind", c.sampler.kind, kSamplers);
    s.real("participation", c.sampler.participation);
  }
  read_algorithm(r, c.algorithm);
  r.size("rounds", c.rounds);
  r.size("batch_size", c.batch_size);
  r.size("eval_every", c.eval_every);
  r.u64("seed", c.seed);
  r.integer("threads", c.threads);
  if (r.has("probe")) {
    const Reader p(loc, r.raw("probe"), r.at("probe"), {"taus"});
    c.probe_taus = p.list<std::size_t>("taus", &Reader::to_size);
  }
  if (r.has("sweep")) {
    const Reader s(loc, r.raw("sweep"), r.at("sweep"),
                   {"tau", "participation", "beta", "alpha", "seed"});
    exp.sweep.tau = s.list<std::size_t>("tau", &Reader::to_size);
    exp.sweep.participation = s.list<double>("participation", &Reader::to_real);
    exp.sweep.beta = s.list<double>("beta", &Reader::to_real);
    exp.sweep.alpha = s.list<double>("alpha", &Reader::to_real);
    exp.sweep.seed = s.list<std::uint64_t>("seed", &Reader::to_u64);
  }
  exp.summary_metric = c.task.family == TaskFamily::kQuadratic
                           ? Metric::kTrainLoss
                           : Metric::kTestAccuracy;
  exp.summary_metric = pick(r, "summary_metric", exp.summary_metric, kMetrics);

  try {
    c.validate();
    (void)expand_sweep(exp);
  } catch (const ConfigError& e) {
    fail_validation(loc, e.what());
  }
  return exp;
}

ExperimentConfig load_experiment(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment(ss.str(), fs::absolute(path).parent_path());
}

std::vector<SweepCell> expand_sweep(const ExperimentConfig& exp) {
  const RunConfig& base = exp.run;
  const auto or_base = [](const auto& axis, auto value) {
    using T = decltype(value);
    return axis.empty() ? std::vector<T>{value} : std::vector<T>(axis.begin(), axis.end());
  };
  const auto taus = or_base(exp.sweep.tau, base.algorithm.tau);
  const auto cs = or_base(exp.sweep.participation, base.sampler.participation);
  const auto betas = or_base(exp.sweep.beta, base.algorithm.beta);
  const auto alphas = or_base(exp.sweep.alpha, base.partition.alpha);
  const auto seeds = or_base(exp.sweep.seed, base.seed);

  std::vector<SweepCell> cells;
  for (auto tau : taus) {
    for (auto c : cs) {
      for (auto beta : betas) {
        for (auto alpha : alphas) {
          for (auto seed : seeds) {
            SweepCell cell;
            cell.run = base;
            cell.run.algorithm.tau = cell.tau = tau;
            cell.run.sampler.participation = cell.participation = c;
            cell.run.algorithm.beta = cell.beta = beta;
            cell.run.partition.alpha = cell.alpha = alpha;
            cell.run.seed = cell.seed = seed;
            std::string tag;
            const auto add = [&tag](const std::string& part) {
              tag += tag.empty() ? part : "_" + part;
            };
            if (!exp.sweep.tau.empty()) add("tau" + std::to_string(tau));
            if (!exp.sweep.participation.empty()) add("C" + format_real(c));
            if (!exp.sweep.beta.empty()) add("beta" + format_real(beta));
            if (!exp.sweep.alpha.empty()) add("alpha" + format_real(alpha));
            if (!exp.sweep.seed.empty()) add("seed" + std::to_string(seed));
            cell.tag = tag;
            try {
              cell.run.validate();
            } catch (const ConfigError& e) {
              throw ConfigError("sweep: cell " + (tag.empty() ? "<base>" : tag) +
                                ": " + e.what());
            }
            cells.push_back(std::move(cell));
          }
        }
      }
    }
  }
  return cells;
}

std::string records_csv(std::span<const RoundRecord> records) {
  std::string out = "round,train_loss,test_loss,test_accuracy,deviation,bytes_cum\n";
  const auto opt = [](const std::optional<double>& v) {
    return v ? format_real(*v) : std::string();
  };
  for (const auto& r : records) {
    out += std::to_string(r.round) + ',' + format_real(r.train_loss) + ',' +
           opt(r.test_loss) + ',' + opt(r.test_accuracy) + ',' +
           opt(r.deviation) + ',' + format_real(r.bytes_cum) + '\n';
  }
  return out;
}

std::string manifest_json(const RunResult& result, const std::string& name) {
  char hash[20];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(result.config_hash));
  json m;
  m["name"] = name;
  m["config_hash"] = hash;
  m["seed"] = result.config.seed;
  m["config"] = run_json(result.config);
  m["rounds_evaluated"] = result.records.size();
  if (!result.records.empty()) {
    const auto& last = result.records.back();
    m["final"] = {{"round", last.round},
                  {"train_loss", last.train_loss},
                  {"train_accuracy", optional_real(last.train_accuracy)},
                  {"test_loss", optional_real(last.test_loss)},
                  {"test_accuracy", optional_real(last.test_accuracy)},
                  {"bytes_cum", last.bytes_cum},
                  {"grad_evals_cum", last.grad_evals_cum}};
  }
  m["wall_seconds"] = result.wall_seconds;
  return m.dump(2) + "\n";
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw Error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

int capped_threads(int requested) {
  const char* env = std::getenv("GHBM_THREADS");
  if (env == nullptr || *env == '\0') return requested;
  char* end = nullptr;
  const long cap = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || cap < 1) return requested;
  return static_cast<int>(std::min<long>(requested, cap));
}

}  // namespace ghbm
