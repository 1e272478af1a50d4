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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any fails. Pass criterion numbers to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mfoml/baselines.h"
#include "mfoml/dynamics.h"
#include "mfoml/envs.h"
#include "mfoml/evaluation.h"
#include "mfoml/nplayer.h"
#include "mfoml/oml.h"
#include "mfoml/projection.h"
#include "mfoml/solver.h"
#include "test_util.h"

namespace mfoml {
namespace {

using Clock = std::chrono::steady_clock;
using testing::random_simplex;
using testing::random_test_policy;
using testing::random_transitions;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 3) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

std::string iters(std::optional<int> k) {
  return k ? std::to_string(*k) : std::string("never");
}

// ---------------------------------------------------------------------------
// Environment grids shared by the convergence and ordering criteria.

const std::vector<double> kAlphaGrid = {0.1, 0.3, 1, 3, 10, 30, 100};
const std::vector<double> kRateGrid = {0.1, 1, 10, 30, 100, 300};
const std::vector<std::string> kEnvs = {"building-evacuation", "random-linear",
                                        "sis"};
// Wall-clock cap per grid point; divergent step sizes would otherwise run
// the full iteration budget.
constexpr double kPointSeconds = 45.0;

struct GridPoint {
  double parameter = 0.0;
  std::optional<int> to_1e6;
  std::optional<int> to_1e4;
  int iterations = 0;
  double seconds = 0.0;
  double final_expl = kInf;
};

struct EnvRuns {
  std::vector<GridPoint> fbs, omd;
  GridPoint fp;
};

std::map<std::string, EnvRuns>& env_runs_cache() {
  static std::map<std::string, EnvRuns> cache;
  return cache;
}

GridPoint summarize(double parameter, const SolverTrace& trace) {
  GridPoint g;
  g.parameter = parameter;
  g.to_1e6 = trace.first_below(1e-6);
  g.to_1e4 = trace.first_below(1e-4);
  g.iterations = static_cast<int>(trace.records.size()) - 1;
  g.seconds = trace.records.back().elapsed_seconds;
  g.final_expl = trace.final_exploitability();
  return g;
}

const EnvRuns& env_runs(const std::string& env) {
  auto& cache = env_runs_cache();
  auto it = cache.find(env);
  if (it != cache.end()) return it->second;
  const MfgModel model = build_env(default_config(env));
  EnvRuns runs;
  for (double alpha : kAlphaGrid) {
    SolverSchedule s;
    s.alpha = alpha;
    s.max_iterations = 5000;
    s.stop_exploitability = 1e-6;
    s.max_seconds = kPointSeconds;
    try {
      runs.fbs.push_back(summarize(
          alpha, solve_mfomi_fbs(model, s, uniform_policy(model.dims()))));
    } catch (const SolverError&) {
      GridPoint g;
      g.parameter = alpha;
      runs.fbs.push_back(g);
    }
  }
  BaselineOptions opt;
  opt.iterations = 5000;
  opt.stop_exploitability = 1e-4;
  opt.max_seconds = kPointSeconds;
  runs.fp = summarize(0.0, fictitious_play(model, opt));
  for (double rate : kRateGrid) {
    runs.omd.push_back(
        summarize(rate, online_mirror_descent(model, rate, opt)));
  }
  return cache[env] = std::move(runs);
}

Outcome convergence() {
  Outcome out{true, ""};
  for (const auto& env : kEnvs) {
    const EnvRuns& runs = env_runs(env);
    const GridPoint* best = nullptr;
    for (const auto& g : runs.fbs) {
      if (g.to_1e6 && g.seconds <= 600.0 &&
          (!best || *g.to_1e6 < *best->to_1e6)) {
        best = &g;
      }
    }
    if (best) {
      out.detail += env + " alpha=" + fmt(best->parameter) + " " +
                    std::to_string(*best->to_1e6) + " it " +
                    fmt(best->seconds) + "s; ";
    } else {
      out.pass = false;
      out.detail += env + " no step size reached 1e-6; ";
    }
  }
  return out;
}

std::optional<int> best_to_1e4(const std::vector<GridPoint>& grid,
                               double* parameter) {
  std::optional<int> best;
  for (const auto& g : grid) {
    if (g.to_1e4 && (!best || *g.to_1e4 < *best)) {
      best = g.to_1e4;
      *parameter = g.parameter;
    }
  }
  return best;
}

Outcome baseline_ordering() {
  Outcome out{true, ""};
  for (const auto& env : kEnvs) {
    const EnvRuns& runs = env_runs(env);
    double alpha = 0.0, rate = 0.0;
    const auto fbs = best_to_1e4(runs.fbs, &alpha);
    const auto omd = best_to_1e4(runs.omd, &rate);
    const auto fp = runs.fp.to_1e4;
    const bool ok = fbs && (!fp || *fbs < *fp) && (!omd || *fbs < *omd);
    out.pass = out.pass && ok;
    out.detail += env + " fbs " + iters(fbs) + " (alpha=" + fmt(alpha) +
                  ") fp " + iters(fp) + " omd " + iters(omd) +
                  (omd ? " (lr=" + fmt(rate) + ")" : "") + "; ";
  }
  return out;
}

// ---------------------------------------------------------------------------

Outcome projection_oracle() {
  std::mt19937_64 rng(2026);
  std::vector<Dims> shapes;
  for (int s = 1; s <= 12; ++s)
    for (int a = 1; a <= 12; ++a)
      for (int t = 1; t <= 12; ++t)
        if (s * a * t <= 12 && s * a * t >= 4) shapes.push_back({s, a, t});
  double worst = 0.0, library_seconds = 0.0;
  const auto start = Clock::now();
  std::normal_distribution<double> noise(0.0, 0.5);
  for (int instance = 0; instance < 50; ++instance) {
    const Dims dims = shapes[rng() % shapes.size()];
    const TransitionTensor p = random_transitions(
        dims.num_states, dims.num_actions, dims.horizon, rng, 0.3);
    const Eigen::VectorXd mu0 = random_simplex(dims.num_states, rng);
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    testing::oracle_constraints(dims, p, mu0, a, b);
    ProjectionWorkspace ws(assemble_polytope(dims, p, mu0));
    for (int k = 0; k < 20; ++k) {
      Eigen::VectorXd target =
          testing::oracle_forward_flow(random_test_policy(dims, rng), p, mu0);
      for (int i = 0; i < target.size(); ++i) target[i] += noise(rng);
      const auto lib_start = Clock::now();
      const Eigen::VectorXd x = ws.project(target).point;
      library_seconds += seconds_since(lib_start);
      const Eigen::VectorXd y = testing::oracle_projection(a, b, target);
      worst = std::max(worst, (x - y).norm());
    }
  }
  const double total = seconds_since(start);
  return {worst <= 1e-6 && library_seconds < 60.0,
          "max l2 gap " + fmt(worst) + " over 1000 targets; projection " +
              fmt(library_seconds) + "s, with oracle " + fmt(total) + "s"};
}

Outcome duality_roundtrip() {
  std::mt19937_64 rng(7);
  double worst_a = 0.0, worst_b = 0.0;
  for (int pair = 0; pair < 1000; ++pair) {
    const Dims dims{1 + static_cast<int>(rng() % 4),
                    1 + static_cast<int>(rng() % 4),
                    1 + static_cast<int>(rng() % 5)};
    const TransitionTensor p = random_transitions(
        dims.num_states, dims.num_actions, dims.horizon, rng, 0.4);
    Eigen::VectorXd mu0 = random_simplex(dims.num_states, rng);
    if (dims.num_states > 1 && pair % 2 == 0) {
      mu0[rng() % dims.num_states] = 0.0;
      mu0 /= mu0.sum();
    }
    const Policy pi = random_test_policy(dims, rng);
    // normalize(Gamma(pi)) = pi, with pi breaking ties at massless states.
    const MeanFieldFlow flow = forward_flow(pi, p, mu0);
    worst_a = std::max(
        worst_a, (normalize(flow, pi).flat() - pi.flat()).lpNorm<1>());
    // Gamma(normalize(d)) = d for a valid flow d.
    const MeanFieldFlow d =
        forward_flow(random_test_policy(dims, rng), p, mu0);
    worst_b = std::max(
        worst_b, (forward_flow(normalize(d), p, mu0).flat() - d.flat())
                     .lpNorm<1>());
  }
  return {worst_a <= 1e-9 && worst_b <= 1e-9,
          "max l1 error normalize(Gamma(pi)) " + fmt(worst_a) +
              ", Gamma(normalize(d)) " + fmt(worst_b)};
}

Outcome contraction() {
  Outcome out{true, ""};
  for (double lambda : {0.25, 0.5, 1.0}) {
    double worst_excess = -kInf, worst_ratio = 0.0;
    int measured = 0;
    for (int m = 0; m < 3; ++m) {
      std::mt19937_64 rng(100 + m);
      const Dims dims = m == 2 ? Dims{3, 2, 3} : Dims{2, 2, 3};
      // Small base rewards keep the fixed point in the interior, where the
      // iterates approach it geometrically instead of landing on it.
      const MfgModel model =
          testing::random_monotone_model(dims, lambda, rng, 0.2);
      const SolverSchedule derived =
          derive_schedule(lambda, dims.num_states, dims.num_actions,
                          dims.horizon, lambda);
      const double bound = std::sqrt(1.0 - derived.kappa.value());
      SolverOptions opt;
      opt.projection.eps_abs = 1e-11;
      opt.projection.eps_rel = 1e-11;
      opt.projection.max_inner_iterations = 100000;
      SolverSchedule long_run = derived;
      long_run.max_iterations = 4000;
      const MeanFieldFlow star =
          solve_mfomi_fbs(model, long_run, uniform_policy(dims), opt)
              .final_flow;
      SolverSchedule short_run = derived;
      short_run.max_iterations = 51;
      opt.record_iterates = true;
      const SolverTrace trace =
          solve_mfomi_fbs(model, short_run, uniform_policy(dims), opt);
      for (int k = 5; k <= 50; ++k) {
        const double before = (trace.iterates[k].flat() - star.flat()).norm();
        const double after =
            (trace.iterates[k + 1].flat() - star.flat()).norm();
        // Below this the distance is projection noise, not contraction.
        if (before <= 1e-9) continue;
        ++measured;
        worst_ratio = std::max(worst_ratio, after / before);
        worst_excess = std::max(worst_excess, after / before - bound);
      }
    }
    const bool ok = measured > 0 && worst_excess <= 0.02;
    out.pass = out.pass && ok;
    out.detail += "lambda=" + fmt(lambda) + " max ratio " +
                  fmt(worst_ratio, 5) + ", max ratio - bound " +
                  fmt(worst_excess, 3) + " over " + std::to_string(measured) +
                  " steps; ";
  }
  return out;
}

Outcome gamma_lipschitz() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = -kInf;
  for (int triple = 0; triple < 500; ++triple) {
    const Dims dims{1 + static_cast<int>(rng() % 4),
                    1 + static_cast<int>(rng() % 3),
                    1 + static_cast<int>(rng() % 6)};
    const Policy pi = random_test_policy(dims, rng);
    const TransitionTensor p = random_transitions(
        dims.num_states, dims.num_actions, dims.horizon, rng, 0.3);
    const TransitionTensor other = random_transitions(
        dims.num_states, dims.num_actions, dims.horizon, rng, 0.3);
    // Blend toward an independent tensor to cover small and large gaps.
    const double w = std::pow(u(rng), 3.0);
    TransitionTensor q = p;
    for (size_t i = 0; i < q.data().size(); ++i) {
      q.data()[i] = (1.0 - w) * p.data()[i] + w * other.data()[i];
    }
    const Eigen::VectorXd mu0 = random_simplex(dims.num_states, rng);
    const double gap =
        (forward_flow(pi, p, mu0).flat() - forward_flow(pi, q, mu0).flat())
            .lpNorm<1>();
    const double t = dims.horizon;
    const double bound = t * (t - 1.0) / 2.0 * p.max_row_l1_distance(q);
    worst = std::max(worst, gap - bound);
  }
  return {worst <= 1e-10,
          "max (l1 gap - bound) over 500 triples " + fmt(worst)};
}

// A model whose states in `hidden` carry no initial mass and receive no
// transitions from the other states.
MfgModel model_with_unreachable(std::mt19937_64& rng) {
  const int s_n = 3 + static_cast<int>(rng() % 3);
  const int a_n = 2 + static_cast<int>(rng() % 2);
  const int t_n = 2 + static_cast<int>(rng() % 3);
  const Dims dims{s_n, a_n, t_n};
  std::set<int> hidden{static_cast<int>(rng() % s_n)};
  if (s_n > 3) hidden.insert(static_cast<int>(rng() % s_n));
  TransitionTensor p = random_transitions(s_n, a_n, t_n, rng, 0.2);
  for (int t = 0; t + 1 < t_n; ++t)
    for (int s = 0; s < s_n; ++s) {
      if (hidden.count(s)) continue;
      for (int a = 0; a < a_n; ++a) {
        auto row = p.row(t, s, a);
        double total = 0.0;
        for (int n : hidden) row[n] = 0.0;
        for (double v : row) total += v;
        if (total == 0.0) {
          for (int n = 0; n < s_n; ++n) row[n] = hidden.count(n) ? 0.0 : 1.0;
          total = s_n - static_cast<double>(hidden.size());
        }
        for (double& v : row) v /= total;
      }
    }
  Eigen::VectorXd mu0 = random_simplex(s_n, rng);
  for (int n : hidden) mu0[n] = 0.0;
  mu0 /= mu0.sum();
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::VectorXd base(dims.flat_size());
  for (int i = 0; i < base.size(); ++i) base[i] = n(rng);
  return testing::monotone_model(dims, std::move(p), std::move(mu0), base,
                                 0.7);
}

Outcome default_modification() {
  std::mt19937_64 rng(17);
  double worst_flow = 0.0, worst_expl = 0.0;
  int modified_cells = 0;
  for (int m = 0; m < 20; ++m) {
    const MfgModel model = model_with_unreachable(rng);
    const ReachabilitySets reach = reachability(model);
    modified_cells += reach.count();
    const MfgModel modified = apply_default_modification(model, reach);
    for (int k = 0; k < 10; ++k) {
      const Policy pi = random_test_policy(model.dims(), rng);
      worst_flow = std::max(worst_flow, (forward_flow(pi, model).flat() -
                                         forward_flow(pi, modified).flat())
                                            .lpNorm<1>());
      worst_expl = std::max(worst_expl, std::abs(exploitability(model, pi) -
                                                 exploitability(modified, pi)));
    }
  }
  return {worst_flow <= 1e-9 && worst_expl <= 1e-9 && modified_cells > 0,
          "200 policies, " + std::to_string(modified_cells) +
              " unreachable (t,s) cells; max flow gap " + fmt(worst_flow) +
              ", max exploitability gap " + fmt(worst_expl)};
}

// ---------------------------------------------------------------------------

Outcome estimator_concentration() {
  const Dims dims{2, 2, 3};
  TransitionTensor p(2, 2, 2);
  const double rows[4][2] = {{0.8, 0.2}, {0.3, 0.7}, {0.6, 0.4}, {0.1, 0.9}};
  for (int t = 0; t < 2; ++t)
    for (int s = 0; s < 2; ++s)
      for (int a = 0; a < 2; ++a)
        for (int n = 0; n < 2; ++n) p(t, s, a, n) = rows[s * 2 + a][n];
  Eigen::VectorXd mu0(2);
  mu0 << 0.5, 0.5;
  Eigen::VectorXd base(dims.flat_size());
  base << 0.2, -0.1, 0.0, 0.3, 0.1, -0.2, 0.4, 0.0, 0.0, 0.1, -0.3, 0.2;
  const double lambda = 1.0;
  const MfgModel model = testing::monotone_model(dims, p, mu0, base, lambda);
  const int n_players = 50;
  const double delta = 0.05;
  const double p_min = exploration_p_min(model);
  const long n_k = std::max<long>(
      1000, static_cast<long>(2.0 * std::log(2.0 / delta) / (p_min * p_min)) +
                1);
  ErrorBoundInputs in;
  in.num_states = 2;
  in.num_actions = 2;
  in.horizon = 3;
  in.num_players = n_players;
  in.c_r = lambda;
  in.r_max = model.r_max();
  in.p_min = p_min;
  in.delta = delta;
  in.n_k = n_k;
  in.cumulative_n = n_k;
  const EstimationErrorBound bound = error_bounds(in);
  // The population plays pi and d = Gamma(pi), so the execution error is 0.
  std::mt19937_64 rng(3);
  const Policy pi = random_test_policy(dims, rng);
  const MeanFieldFlow flow = forward_flow(pi, model);
  std::vector<double> truth(dims.flat_size());
  for (int t = 0; t < 3; ++t) {
    model.reward_slice(t, flow.slice(t),
                       std::span<double>(truth.data() + t * 4, 4));
  }
  const double reward_bound = reward_error_bound(in, 0.0);

  const int trials = 200;
  int tv_within = 0, reward_within = 0;
  double max_tv = 0.0, sum_r = 0.0, sum_r2 = 0.0, max_r = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    const NPlayerGame game(model, n_players, 9000 + trial);
    const ExplorationBatch batch =
        sample_explore(game, pi, static_cast<int>(n_k), 0);
    const std::vector<ExplorationBatch> batches{batch};
    const TransitionEstimate est = estimate_transitions(batches, dims);
    double tv = 0.0;
    for (int t = 0; t < 2; ++t)
      for (int s = 0; s < 2; ++s)
        for (int a = 0; a < 2; ++a) {
          if (est.counts[(t * 2 + s) * 2 + a] == 0) continue;
          double l1 = 0.0;
          for (int n = 0; n < 2; ++n) l1 += std::abs(est.p(t, s, a, n) - p(t, s, a, n));
          tv = std::max(tv, l1);
        }
    max_tv = std::max(max_tv, tv);
    if (tv <= bound.epsilon2) ++tv_within;
    const RewardEstimate r = estimate_rewards(batch, dims);
    double err = 0.0;
    for (int i = 0; i < dims.flat_size(); ++i) {
      if (r.counts[i] > 0) err = std::max(err, std::abs(r.mean[i] - truth[i]));
    }
    sum_r += err;
    sum_r2 += err * err;
    max_r = std::max(max_r, err);
    if (err <= reward_bound) ++reward_within;
  }
  const double mean_r = sum_r / trials;
  const double sd_r =
      std::sqrt(std::max(0.0, sum_r2 / trials - mean_r * mean_r));
  const bool tv_ok = tv_within >= 0.95 * trials;
  // The bound holds with probability 1 - delta; the mean error plus five
  // standard errors must also sit below it.
  const bool reward_ok = reward_within >= (1.0 - delta) * trials &&
                         mean_r + 5.0 * sd_r / std::sqrt(trials) <= reward_bound;
  return {tv_ok && reward_ok && bound.precondition_met,
          "n_k=" + std::to_string(n_k) + " p_min=" + fmt(p_min) +
              "; TV within eps2=" + fmt(bound.epsilon2) + " in " +
              std::to_string(tv_within) + "/200 (max " + fmt(max_tv) +
              "); reward error mean " + fmt(mean_r) + " max " + fmt(max_r) +
              " vs bound " + fmt(reward_bound)};
}

Outcome online_rl() {
  const auto start = Clock::now();
  SisParams sis;
  sis.horizon = 4;
  const MfgModel model = make_sis(sis);
  OmlConfig config;
  config.alpha = 0.02;
  config.outer_iterations = 50;
  config.schedule.kind = EpisodeSchedule::Kind::kConstant;
  config.schedule.constant = 20;
  Outcome out{true, ""};
  double previous = kInf;
  for (int n_players : {3, 6, 20}) {
    RegretTrace mean;
    for (uint64_t seed = 0; seed < 10; ++seed) {
      const NPlayerGame game(model, n_players, seed);
      const RegretTrace run =
          run_mf_oml(game, config, true_model_oracle(model)).regret;
      if (mean.records.empty()) {
        mean = run;
        for (auto& r : mean.records) {
          r.exploitability = 0.0;
          r.cumulative_regret = 0.0;
        }
      }
      for (size_t i = 0; i < run.records.size(); ++i) {
        mean.records[i].exploitability += run.records[i].exploitability / 10;
        mean.records[i].cumulative_regret +=
            run.records[i].cumulative_regret / 10;
      }
    }
    const RegretReport report = regret_report(mean);
    const double at_1000 = mean.records.at(999).cumulative_regret;
    const bool ok = report.growth_exponent < 0.95 && at_1000 < previous;
    out.pass = out.pass && ok;
    previous = at_1000;
    out.detail += "N=" + std::to_string(n_players) + " exponent " +
                  fmt(report.growth_exponent) + " regret(1000) " +
                  fmt(at_1000) + "; ";
  }
  const double elapsed = seconds_since(start);
  out.pass = out.pass && elapsed <= 1800.0;
  out.detail += fmt(elapsed) + "s";
  return out;
}

// Exact two-player quantities on the joint chain. Player 0 is the focal
// agent; player 1 plays `other`. Initial states are i.i.d. from mu0.
struct TwoPlayerGame {
  const MfgModel& model;
  int s_n, a_n, t_n;

  std::vector<double> flow_of(int s0, int a0, int s1, int a1) const {
    const Dims& d = model.dims();
    std::vector<double> flow(d.state_actions(), 0.0);
    flow[d.slice_index(s0, a0)] += 0.5;
    flow[d.slice_index(s1, a1)] += 0.5;
    return flow;
  }

  // Value of player 0 when it plays `mine` (a policy over its own state).
  double value(const Policy& mine, const Policy& other) const {
    const Dims& d = model.dims();
    std::vector<double> dist(s_n * s_n);
    for (int x = 0; x < s_n; ++x)
      for (int y = 0; y < s_n; ++y)
        dist[x * s_n + y] = model.mu0()[x] * model.mu0()[y];
    double total = 0.0;
    std::vector<double> reward(d.state_actions());
    std::vector<double> stage(d.state_actions() * s_n);
    for (int t = 0; t < t_n; ++t) {
      std::vector<double> next(s_n * s_n, 0.0);
      for (int x = 0; x < s_n; ++x)
        for (int y = 0; y < s_n; ++y) {
          const double w = dist[x * s_n + y];
          if (w == 0.0) continue;
          for (int a = 0; a < a_n; ++a)
            for (int b = 0; b < a_n; ++b) {
              const double pr = w * mine(t, x, a) * other(t, y, b);
              if (pr == 0.0) continue;
              const auto flow = flow_of(x, a, y, b);
              model.reward_slice(t, flow, reward);
              total += pr * reward[d.slice_index(x, a)];
              if (t + 1 == t_n) continue;
              model.transition_stage(t, flow, stage);
              for (int nx = 0; nx < s_n; ++nx)
                for (int ny = 0; ny < s_n; ++ny)
                  next[nx * s_n + ny] += pr * stage[(x * a_n + a) * s_n + nx] *
                                         stage[(y * a_n + b) * s_n + ny];
            }
        }
      dist = std::move(next);
    }
    return total;
  }

  // Best response over policies that see the joint state; an upper bound on
  // the best own-state policy.
  double joint_best_value(const Policy& other) const {
    const Dims& d = model.dims();
    std::vector<double> v(s_n * s_n, 0.0);
    std::vector<double> reward(d.state_actions());
    std::vector<double> stage(d.state_actions() * s_n);
    for (int t = t_n - 1; t >= 0; --t) {
      std::vector<double> cur(s_n * s_n);
      for (int x = 0; x < s_n; ++x)
        for (int y = 0; y < s_n; ++y) {
          double best = -kInf;
          for (int a = 0; a < a_n; ++a) {
            double q = 0.0;
            for (int b = 0; b < a_n; ++b) {
              const double pb = other(t, y, b);
              if (pb == 0.0) continue;
              const auto flow = flow_of(x, a, y, b);
              model.reward_slice(t, flow, reward);
              double cont = 0.0;
              if (t + 1 < t_n) {
                model.transition_stage(t, flow, stage);
                for (int nx = 0; nx < s_n; ++nx)
                  for (int ny = 0; ny < s_n; ++ny)
                    cont += stage[(x * a_n + a) * s_n + nx] *
                            stage[(y * a_n + b) * s_n + ny] *
                            v[nx * s_n + ny];
              }
              q += pb * (reward[d.slice_index(x, a)] + cont);
            }
            best = std::max(best, q);
          }
          cur[x * s_n + y] = best;
        }
      v = std::move(cur);
    }
    double total = 0.0;
    for (int x = 0; x < s_n; ++x)
      for (int y = 0; y < s_n; ++y)
        total += model.mu0()[x] * model.mu0()[y] * v[x * s_n + y];
    return total;
  }

  // Best response over deterministic own-state policies, by enumeration.
  double own_best_value(const Policy& other) const {
    const Dims& d = model.dims();
    const int slots = s_n * t_n;
    std::vector<int> choice(slots, 0);
    double best = -kInf;
    while (true) {
      Policy mine(d, Eigen::VectorXd::Zero(d.flat_size()));
      for (int t = 0; t < t_n; ++t)
        for (int s = 0; s < s_n; ++s) mine(t, s, choice[t * s_n + s]) = 1.0;
      best = std::max(best, value(mine, other));
      int i = 0;
      while (i < slots && ++choice[i] == a_n) choice[i++] = 0;
      if (i == slots) break;
    }
    return best;
  }
};

Outcome mean_field_bound() {
  const Dims dims{2, 2, 2};
  std::mt19937_64 rng(23);
  const double lambda = 1.0;
  // Small base rewards keep the equilibrium mixed.
  const MfgModel model =
      testing::random_monotone_model(dims, lambda, rng, 0.2);
  SolverSchedule s;
  s.alpha = 0.3;
  s.max_iterations = 5000;
  s.stop_exploitability = 1e-10;
  const SolverTrace trace =
      solve_mfomi_fbs(model, s, uniform_policy(dims));
  const Policy& pi = trace.final_policy;
  const double expl = exploitability(model, pi);
  const TwoPlayerGame game{model, 2, 2, 2};
  const double v = game.value(pi, pi);
  const double joint_conv = game.joint_best_value(pi) - v;
  const double own_conv = game.own_best_value(pi) - v;
  const double n = 2.0, sat = dims.flat_size(), c_r = lambda;
  const double bound = expl +
                       2.0 * c_r * std::sqrt(std::numbers::pi / 2.0) * sat /
                           std::sqrt(n) +
                       c_r * sat / n;
  return {joint_conv <= bound && own_conv <= joint_conv + 1e-12,
          "Expl " + fmt(expl) + "; NashConv " + fmt(own_conv) +
              " (joint-state best response " + fmt(joint_conv) +
              ") vs bound " + fmt(bound)};
}

Outcome warm_start() {
  const MfgModel model = build_env(default_config("building-evacuation"));
  SolverSchedule s;
  s.alpha = 0.3;
  s.max_iterations = 500;
  s.stop_exploitability = 1e-6;
  SolverOptions warm, cold;
  cold.projection.warm_start = false;
  const SolverTrace w = solve_mfomi_fbs(model, s, uniform_policy(model.dims()),
                                        warm);
  const SolverTrace c = solve_mfomi_fbs(model, s, uniform_policy(model.dims()),
                                        cold);
  const double ratio = static_cast<double>(w.total_inner_iterations()) /
                       static_cast<double>(c.total_inner_iterations());
  return {ratio <= 0.8 && w.converged && c.converged,
          "alpha=0.3: warm " + std::to_string(w.total_inner_iterations()) +
              " vs cold " + std::to_string(c.total_inner_iterations()) +
              " inner iterations, ratio " + fmt(ratio)};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace mfoml

int main(int argc, char** argv) {
  using namespace mfoml;
  const std::vector<Criterion> criteria = {
      {"convergence to 1e-6 on three environments", convergence},
      {"fbs reaches 1e-4 before fp and omd", baseline_ordering},
      {"projection matches the exhaustive oracle", projection_oracle},
      {"duality roundtrip", duality_roundtrip},
      {"contraction rate", contraction},
      {"flow map Lipschitz bound", gamma_lipschitz},
      {"default modification equivalence", default_modification},
      {"estimator concentration", estimator_concentration},
      {"online learning regret", online_rl},
      {"mean-field approximation bound", mean_field_bound},
      {"warm-start speedup", warm_start},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = Clock::now();
    Outcome out;
    try {
      out = criteria[i].run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    if (!out.pass) ++failures;
    std::printf("[%s] %2d %s: %s (%.1fs)\n", out.pass ? "PASS" : "FAIL", id,
                criteria[i].name, out.detail.c_str(), seconds_since(start));
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
