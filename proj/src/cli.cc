// Copyright 2026 The MFOML Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mfoml/cli.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "mfoml/baselines.h"
#include "mfoml/envs.h"
#include "mfoml/evaluation.h"

namespace mfoml {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write '" + tmp + "'");
    out << contents;
    if (!out.flush()) throw InvalidArgument("cannot write '" + tmp + "'");
  }
  fs::rename(tmp, target);
}

std::string solver_csv(const SolverTrace& trace, bool include_timing) {
  std::ostringstream os;
  os << "iteration,cumulative_runtime_s,exploitability\n";
  for (const auto& r : trace.records) {
    os << r.iteration << ','
       << format_double(include_timing ? r.elapsed_seconds : 0.0) << ','
       << format_double(r.exploitability) << '\n';
  }
  return os.str();
}

std::string regret_csv(const RegretTrace& trace) {
  std::ostringstream os;
  os << "episode,iteration,expl,expl_regret\n";
  for (const auto& r : trace.records) {
    os << r.episode << ',' << r.iteration << ','
       << format_double(r.exploitability) << ','
       << format_double(r.cumulative_regret) << '\n';
  }
  return os.str();
}

std::string regret_aggregate_csv(const std::vector<RegretTrace>& runs) {
  if (runs.empty()) throw InvalidArgument("no runs to aggregate");
  const size_t length = runs.front().records.size();
  for (const auto& run : runs) {
    if (run.records.size() != length) {
      throw InvalidArgument("runs differ in episode count");
    }
  }
  const double n = static_cast<double>(runs.size());
  auto summarize = [&](size_t i, auto field) {
    double mean = 0.0;
    for (const auto& run : runs) mean += field(run.records[i]);
    mean /= n;
    double var = 0.0;
    for (const auto& run : runs) {
      const double d = field(run.records[i]) - mean;
      var += d * d;
    }
    const double half =
        runs.size() > 1 ? 1.96 * std::sqrt(var / (n - 1.0)) / std::sqrt(n)
                        : 0.0;
    return std::pair{mean, half};
  };
  std::ostringstream os;
  os << "episode,iteration,expl_mean,expl_half_width,expl_regret_mean,"
        "expl_regret_half_width\n";
  for (size_t i = 0; i < length; ++i) {
    const auto [em, eh] =
        summarize(i, [](const RegretRecord& r) { return r.exploitability; });
    const auto [rm, rh] =
        summarize(i, [](const RegretRecord& r) { return r.cumulative_regret; });
    const auto& first = runs.front().records[i];
    os << first.episode << ',' << first.iteration << ',' << format_double(em)
       << ',' << format_double(eh) << ',' << format_double(rm) << ','
       << format_double(rh) << '\n';
  }
  return os.str();
}

namespace {

// Step sizes used when --alpha is not given, picked from the benchmark grid.
double default_alpha(const std::string& environment) {
  if (environment == "building-evacuation") return 1.0;
  if (environment == "random-linear") return 30.0;
  if (environment == "sis") return 30.0;
  return 0.1;
}

const std::vector<double> kFbsAlphaGrid = {0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0};
const std::vector<double> kOmdRateGrid = {0.1, 1.0, 10.0, 30.0, 100.0, 300.0};

std::string iso_time_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string output_root(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("MFOML_OUT_DIR")) return env;
  return ".";
}

// Either a path to a config file or a built-in name with --param overrides.
EnvConfig resolve_env(const std::string& env,
                      const std::vector<std::string>& params,
                      std::optional<uint64_t> seed) {
  std::map<std::string, std::string> overrides;
  for (const auto& p : params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ParseError("--param expects name=value, got '" + p + "'");
    }
    overrides[p.substr(0, eq)] = p.substr(eq + 1);
  }
  EnvConfig config;
  if (fs::exists(env) && fs::is_regular_file(env)) {
    if (!overrides.empty()) {
      throw ParseError("--param applies only to built-in environment names");
    }
    config = load_env_config(env);
  } else {
    config = default_config(env, overrides);
  }
  if (seed.has_value()) config.seed = *seed;
  return config;
}

struct Manifest {
  std::string command;
  std::vector<std::string> argv;
  EnvConfig env;
  std::string env_reference;
  json hyper = json::object();
  std::vector<uint64_t> seeds;
  std::vector<std::string> outputs;
  double wall_clock_s = 0.0;
  std::string started_at;
};

void write_manifest(const std::string& path, const Manifest& m) {
  json doc{{"command", m.command},
           {"argv", m.argv},
           {"env_reference", m.env_reference},
           {"env_config", json::parse(dump_env_config(m.env))},
           {"hyper_parameters", m.hyper},
           {"seeds", m.seeds},
           {"outputs", m.outputs},
           {"artifact_version", kVersion},
           {"started_at", m.started_at},
           {"wall_clock_s", m.wall_clock_s}};
  write_file_atomic(path, doc.dump(2) + "\n");
}

struct SolveSpec {
  std::string algorithm = "mfomi-fbs";
  std::optional<double> alpha;
  double eta = 0.0;
  double learning_rate = 1.0;
  int iterations = 1000;
  double stop_expl = 1e-6;
  int stride = 1;
  std::optional<double> time_budget;
};

SolverTrace run_solve(const MfgModel& model, const std::string& environment,
                      const SolveSpec& spec, json& hyper) {
  if (spec.algorithm == "mfomi-fbs") {
    SolverSchedule schedule;
    schedule.alpha = spec.alpha.value_or(default_alpha(environment));
    schedule.eta = spec.eta;
    schedule.max_iterations = spec.iterations;
    schedule.stop_exploitability = spec.stop_expl;
    schedule.max_seconds = spec.time_budget;
    SolverOptions options;
    options.exploitability_stride = spec.stride;
    hyper = {{"alpha", schedule.alpha}, {"eta", schedule.eta}};
    return solve_mfomi_fbs(model, schedule, uniform_policy(model.dims()),
                           options);
  }
  BaselineOptions options;
  options.iterations = spec.iterations;
  options.stop_exploitability = spec.stop_expl;
  options.exploitability_stride = spec.stride;
  options.max_seconds = spec.time_budget;
  if (spec.algorithm == "fictitious-play") {
    hyper = json::object();
    return fictitious_play(model, options);
  }
  if (spec.algorithm == "omd") {
    hyper = {{"learning_rate", spec.learning_rate}};
    return online_mirror_descent(model, spec.learning_rate, options);
  }
  throw ParseError("unknown algorithm '" + spec.algorithm + "'");
}

// Runs `jobs` on a bounded pool; the first exception is rethrown.
void run_pool(std::vector<std::function<void()>>& jobs, int workers) {
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    for (size_t i = next++; i < jobs.size(); i = next++) {
      try {
        jobs[i]();
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  workers = std::clamp<int>(workers, 1, std::max<size_t>(1, jobs.size()));
  std::vector<std::thread> threads;
  for (int w = 1; w < workers; ++w) threads.emplace_back(work);
  work();
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

std::string slug(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

int cmd_solve(const std::vector<std::string>& argv, const std::string& env,
              const std::vector<std::string>& params,
              std::optional<uint64_t> seed, const SolveSpec& spec,
              const std::string& out_flag, bool timing) {
  const auto start = std::chrono::steady_clock::now();
  Manifest manifest;
  manifest.started_at = iso_time_now();
  manifest.command = "solve";
  manifest.argv = argv;
  manifest.env_reference = env;
  manifest.env = resolve_env(env, params, seed);
  manifest.seeds = {manifest.env.seed};
  const MfgModel model = build_env(manifest.env);
  SolverTrace trace =
      run_solve(model, manifest.env.environment, spec, manifest.hyper);
  manifest.hyper["algorithm"] = spec.algorithm;
  manifest.hyper["iterations"] = spec.iterations;
  manifest.hyper["stop_expl"] = spec.stop_expl;
  manifest.hyper["stride"] = spec.stride;
  if (spec.time_budget) manifest.hyper["time_budget_s"] = *spec.time_budget;

  std::string out = out_flag;
  if (out.empty() || fs::is_directory(out)) {
    out = (fs::path(output_root(out_flag)) /
           (manifest.env.environment + "_" + spec.algorithm + ".csv"))
              .string();
  }
  write_file_atomic(out, solver_csv(trace, timing));
  manifest.outputs = {out};
  manifest.wall_clock_s = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - start)
                              .count();
  write_manifest(out + ".manifest.json", manifest);
  std::cout << spec.algorithm << " on " << manifest.env.environment << ": "
            << trace.records.size() - 1 << " iterations, exploitability "
            << format_double(trace.final_exploitability())
            << (trace.heuristic ? " (mean-field-dependent dynamics)" : "")
            << "\n";
  return trace.converged ? kExitConverged : kExitBudgetExhausted;
}

struct LearnSpec {
  int num_players = 20;
  int n_k = 20;
  std::string schedule = "constant";
  int outer_iters = 50;
  double alpha = 0.02;
  std::string eta = "0";
  bool full_history = false;
  int threads = 1;
  int jobs = 1;
  bool save_batches = false;
};

int cmd_learn(const std::vector<std::string>& argv, const std::string& env,
              const std::vector<std::string>& params,
              const std::vector<uint64_t>& seeds, const LearnSpec& spec,
              const std::string& out_flag) {
  const auto start = std::chrono::steady_clock::now();
  if (seeds.empty()) throw ParseError("at least one seed is required");
  Manifest manifest;
  manifest.started_at = iso_time_now();
  manifest.command = "learn";
  manifest.argv = argv;
  manifest.env_reference = env;
  manifest.env = resolve_env(env, params, std::nullopt);
  manifest.seeds = seeds;
  const MfgModel model = build_env(manifest.env);

  OmlConfig config;
  config.alpha = spec.alpha;
  config.outer_iterations = spec.outer_iters;
  config.full_history = spec.full_history;
  config.num_threads = spec.threads;
  if (spec.schedule == "constant") {
    config.schedule.kind = EpisodeSchedule::Kind::kConstant;
    config.schedule.constant = spec.n_k;
  } else if (spec.schedule == "cubic") {
    config.schedule.kind = EpisodeSchedule::Kind::kCubic;
  } else {
    throw ParseError("unknown --n-k-schedule '" + spec.schedule + "'");
  }
  if (spec.eta == "theory") {
    config.eta = theoretical_eta(
        spec.num_players, config.schedule.cumulative(config.outer_iterations));
  } else {
    try {
      config.eta = std::stod(spec.eta);
    } catch (const std::exception&) {
      throw ParseError("--eta expects a number or 'theory'");
    }
  }
  config.check();
  manifest.hyper = {{"alpha", config.alpha},
                    {"eta", config.eta},
                    {"n_players", spec.num_players},
                    {"n_k", spec.n_k},
                    {"n_k_schedule", spec.schedule},
                    {"outer_iters", spec.outer_iters},
                    {"full_history", spec.full_history}};

  const fs::path dir(output_root(out_flag));
  std::vector<RegretTrace> runs(seeds.size());
  std::vector<std::string> batch_text(seeds.size());
  std::vector<std::function<void()>> jobs;
  for (size_t i = 0; i < seeds.size(); ++i) {
    jobs.push_back([&, i] {
      NPlayerGame game(model, spec.num_players, seeds[i],
                       manifest.env.reward_noise);
      OmlResult result = run_mf_oml(game, config, true_model_oracle(model),
                                    spec.save_batches);
      runs[i] = std::move(result.regret);
      if (spec.save_batches) {
        std::ostringstream os;
        for (const auto& batch : result.batches) write_batch_jsonl(batch, os);
        batch_text[i] = os.str();
      }
    });
  }
  run_pool(jobs, spec.jobs);
  for (size_t i = 0; i < seeds.size(); ++i) {
    const std::string seed = std::to_string(seeds[i]);
    const std::string path = (dir / ("regret_seed" + seed + ".csv")).string();
    write_file_atomic(path, regret_csv(runs[i]));
    manifest.outputs.push_back(path);
    if (spec.save_batches) {
      const std::string batches =
          (dir / ("batches_seed" + seed + ".jsonl")).string();
      write_file_atomic(batches, batch_text[i]);
      manifest.outputs.push_back(batches);
    }
  }
  const std::string aggregate = (dir / "regret_aggregate.csv").string();
  write_file_atomic(aggregate, regret_aggregate_csv(runs));
  manifest.outputs.push_back(aggregate);
  manifest.wall_clock_s = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - start)
                              .count();
  write_manifest((dir / "learn.manifest.json").string(), manifest);
  double mean_final = 0.0;
  for (const auto& run : runs) {
    if (!run.records.empty()) mean_final += run.records.back().cumulative_regret;
  }
  std::cout << "mf-oml on " << manifest.env.environment << " with N="
            << spec.num_players << ": mean final ExplRegret "
            << format_double(mean_final / runs.size()) << " over "
            << runs.size() << " seeds\n";
  return kExitConverged;
}

struct BenchmarkSpec {
  std::vector<std::string> algorithms = {"mfomi-fbs", "fictitious-play", "omd"};
  std::vector<double> alphas = kFbsAlphaGrid;
  std::vector<double> rates = kOmdRateGrid;
  int iterations = 1000;
  double stop_expl = 1e-6;
  std::optional<double> time_budget;
  int jobs = 1;
  bool timing = true;
};

int cmd_benchmark(const std::vector<std::string>& argv,
                  const std::vector<std::string>& envs,
                  const std::vector<std::string>& params,
                  const BenchmarkSpec& spec, const std::string& out_flag) {
  const auto start = std::chrono::steady_clock::now();
  if (envs.empty()) throw ParseError("--env is required");
  struct Point {
    EnvConfig env;
    SolveSpec solve;
    std::string path;
    SolverTrace trace;
    json hyper;
  };
  std::vector<Point> points;
  const fs::path dir(output_root(out_flag));
  for (const auto& env : envs) {
    const EnvConfig config = resolve_env(env, params, std::nullopt);
    for (const auto& algorithm : spec.algorithms) {
      std::vector<SolveSpec> grid;
      SolveSpec base;
      base.algorithm = algorithm;
      base.iterations = spec.iterations;
      base.stop_expl = spec.stop_expl;
      base.time_budget = spec.time_budget;
      if (algorithm == "mfomi-fbs") {
        for (double a : spec.alphas) {
          grid.push_back(base);
          grid.back().alpha = a;
        }
      } else if (algorithm == "omd") {
        for (double r : spec.rates) {
          grid.push_back(base);
          grid.back().learning_rate = r;
        }
      } else if (algorithm == "fictitious-play") {
        grid.push_back(base);
      } else {
        throw ParseError("unknown algorithm '" + algorithm + "'");
      }
      if (grid.empty()) throw ParseError("empty grid for " + algorithm);
      for (const auto& point : grid) {
        std::string name = config.environment + "__" + algorithm;
        if (algorithm == "mfomi-fbs") name += "__alpha=" + slug(*point.alpha);
        if (algorithm == "omd") name += "__lr=" + slug(point.learning_rate);
        points.push_back(
            {config, point, (dir / (name + ".csv")).string(), {}, {}});
      }
    }
  }
  std::vector<std::function<void()>> jobs;
  for (auto& p : points) {
    jobs.push_back([&p] {
      const MfgModel model = build_env(p.env);
      p.trace = run_solve(model, p.env.environment, p.solve, p.hyper);
    });
  }
  run_pool(jobs, spec.jobs);

  struct Row {
    std::string env, algorithm, hyper, path;
    double expl;
    int iterations;
    std::optional<int> to_1e4;
  };
  std::map<std::pair<std::string, std::string>, Row> best;
  Manifest manifest;
  manifest.started_at = iso_time_now();
  manifest.command = "benchmark";
  manifest.argv = argv;
  manifest.env_reference = envs.front();
  manifest.env = points.empty() ? EnvConfig{} : points.front().env;
  manifest.hyper = {{"algorithms", spec.algorithms},
                    {"alphas", spec.alphas},
                    {"learning_rates", spec.rates},
                    {"iterations", spec.iterations},
                    {"stop_expl", spec.stop_expl},
                    {"time_budget_s", spec.time_budget ? json(*spec.time_budget)
                                                       : json(nullptr)}};
  for (auto& p : points) {
    write_file_atomic(p.path, solver_csv(p.trace, spec.timing));
    manifest.outputs.push_back(p.path);
    Row row{p.env.environment,
            p.solve.algorithm,
            p.hyper.dump(),
            p.path,
            p.trace.final_exploitability(),
            static_cast<int>(p.trace.records.size()) - 1,
            p.trace.first_below(1e-4)};
    const auto key = std::pair{row.env, row.algorithm};
    auto it = best.find(key);
    // Lower final exploitability wins; ties go to the faster run.
    auto better = [](const Row& a, const Row& b) {
      if (a.expl != b.expl) return a.expl < b.expl;
      return a.iterations < b.iterations;
    };
    if (it == best.end() || better(row, it->second)) best[key] = row;
  }
  std::vector<Row> rows;
  for (auto& [key, row] : best) rows.push_back(row);
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.env != b.env) return a.env < b.env;
    return a.expl < b.expl;
  });
  std::ostringstream os;
  os << "env,algorithm,hyper_parameters,final_exploitability,iterations,"
        "iterations_to_1e-4,csv\n";
  for (const auto& r : rows) {
    std::string hyper = r.hyper;
    std::replace(hyper.begin(), hyper.end(), ',', ';');
    os << r.env << ',' << r.algorithm << ',' << hyper << ','
       << format_double(r.expl) << ',' << r.iterations << ','
       << (r.to_1e4 ? std::to_string(*r.to_1e4) : "") << ','
       << fs::path(r.path).filename().string() << '\n';
  }
  const std::string leaderboard = (dir / "leaderboard.csv").string();
  write_file_atomic(leaderboard, os.str());
  manifest.outputs.push_back(leaderboard);
  manifest.wall_clock_s = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - start)
                              .count();
  write_manifest((dir / "benchmark.manifest.json").string(), manifest);
  std::cout << os.str();
  return kExitConverged;
}

int cmd_gen_config(const std::string& env,
                   const std::vector<std::string>& params,
                   std::optional<uint64_t> seed, const std::string& out) {
  EnvConfig config = resolve_env(env, params, seed);
  const std::string text = dump_env_config(config);
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_file_atomic(out, text);
  }
  return kExitConverged;
}

int cmd_replay(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw ParseError("cannot read manifest '" + manifest_path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(manifest_path + ": " + e.what());
  }
  if (!doc.contains("argv") || !doc["argv"].is_array()) {
    throw ParseError(manifest_path + ": missing argv");
  }
  return run_cli(doc["argv"].get<std::vector<std::string>>());
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Mean-field game equilibrium solver and online learner",
               "mfoml"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  // solve
  std::string env;
  std::vector<std::string> params;
  std::optional<uint64_t> seed;
  std::string out;
  SolveSpec solve;
  double alpha = 0.0;
  bool no_timing = false;
  auto* solve_cmd = app.add_subcommand("solve", "Solve one environment");
  solve_cmd->add_option("--env", env, "Config file or built-in name")
      ->required();
  solve_cmd->add_option("--param", params, "Built-in parameter name=value");
  solve_cmd->add_option("--algorithm", solve.algorithm)
      ->check(CLI::IsMember({"mfomi-fbs", "fictitious-play", "omd"}));
  auto* alpha_opt = solve_cmd->add_option("--alpha", alpha, "Step size");
  solve_cmd->add_option("--eta", solve.eta, "Perturbation coefficient");
  solve_cmd->add_option("--learning-rate", solve.learning_rate,
                        "OMD learning rate");
  solve_cmd->add_option("--iterations", solve.iterations);
  solve_cmd->add_option("--stop-expl", solve.stop_expl);
  solve_cmd->add_option("--stride", solve.stride,
                        "Exploitability evaluation stride");
  solve_cmd->add_option("--time-budget", solve.time_budget,
                        "Solver time limit in seconds");
  solve_cmd->add_option("--seed", seed, "Environment seed");
  solve_cmd->add_option("--out", out, "Output CSV path or directory");
  solve_cmd->add_flag("--no-timing", no_timing,
                      "Write 0 in the runtime column (byte-stable output)");

  // learn
  LearnSpec learn;
  std::vector<uint64_t> seeds;
  auto* learn_cmd = app.add_subcommand("learn", "Run the online learner");
  learn_cmd->add_option("--env", env)->required();
  learn_cmd->add_option("--param", params);
  learn_cmd->add_option("--n-players", learn.num_players);
  learn_cmd->add_option("--n-k", learn.n_k, "Episodes per outer iteration");
  learn_cmd->add_option("--n-k-schedule", learn.schedule)
      ->check(CLI::IsMember({"constant", "cubic"}));
  learn_cmd->add_option("--outer-iters", learn.outer_iters);
  learn_cmd->add_option("--alpha", learn.alpha);
  learn_cmd->add_option("--eta", learn.eta, "Number or 'theory'");
  learn_cmd->add_option("--seeds", seeds, "One run per seed");
  learn_cmd->add_option("--seed", seeds);
  learn_cmd->add_flag("--full-history", learn.full_history);
  learn_cmd->add_flag("--save-batches", learn.save_batches,
                      "Write exploration batches as JSON lines");
  learn_cmd->add_option("--threads", learn.threads);
  learn_cmd->add_option("--jobs", learn.jobs);
  learn_cmd->add_option("--out", out, "Output directory");

  // benchmark
  BenchmarkSpec bench;
  std::vector<std::string> envs;
  auto* bench_cmd =
      app.add_subcommand("benchmark", "Grid-search several algorithms");
  bench_cmd->add_option("--env", envs)->required();
  bench_cmd->add_option("--param", params);
  bench_cmd->add_option("--algorithm", bench.algorithms);
  bench_cmd->add_option("--alphas", bench.alphas);
  bench_cmd->add_option("--learning-rates", bench.rates);
  bench_cmd->add_option("--iterations", bench.iterations);
  bench_cmd->add_option("--stop-expl", bench.stop_expl);
  bench_cmd->add_option("--time-budget", bench.time_budget,
                        "Per grid point solver time limit in seconds");
  bench_cmd->add_option("--jobs", bench.jobs);
  bench_cmd->add_option("--out", out, "Output directory");
  bench_cmd->add_flag("--no-timing", no_timing);

  // gen-config
  std::string gen_name;
  auto* gen_cmd = app.add_subcommand("gen-config", "Write an env config");
  gen_cmd->add_option("env", gen_name)->required();
  gen_cmd->add_option("--param", params);
  gen_cmd->add_option("--seed", seed);
  gen_cmd->add_option("--out", out, "Output path (stdout when absent)");

  std::string manifest_path;
  auto* replay_cmd =
      app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  replay_cmd->add_option("manifest", manifest_path)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  std::vector<std::string> argv = args;
  try {
    if (*solve_cmd) {
      if (alpha_opt->count() > 0) solve.alpha = alpha;
      return cmd_solve(argv, env, params, seed, solve, out, !no_timing);
    }
    if (*learn_cmd) return cmd_learn(argv, env, params, seeds, learn, out);
    if (*bench_cmd) {
      bench.timing = !no_timing;
      return cmd_benchmark(argv, envs, params, bench, out);
    }
    if (*gen_cmd) return cmd_gen_config(gen_name, params, seed, out);
    if (*replay_cmd) return cmd_replay(manifest_path);
  } catch (const SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBudgetExhausted;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitUsage;
}

}  // namespace mfoml
