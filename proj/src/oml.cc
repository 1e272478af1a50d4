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

#include "mfoml/oml.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfoml/evaluation.h"

namespace mfoml {

int EpisodeSchedule::at(int k) const {
  switch (kind) {
    case Kind::kConstant:
      return constant;
    case Kind::kCubic: {
      const long n = static_cast<long>(k + 1) * (k + 1) * (k + 1);
      if (n > std::numeric_limits<int>::max()) {
        throw InvalidArgument("cubic schedule overflows at iteration " +
                              std::to_string(k));
      }
      return static_cast<int>(n);
    }
    case Kind::kList:
      if (k < 0 || k >= static_cast<int>(list.size())) {
        throw InvalidArgument("episode schedule list has no entry for " +
                              std::to_string(k));
      }
      return list[k];
  }
  return constant;
}

long EpisodeSchedule::cumulative(int iterations) const {
  long total = 0;
  for (int k = 0; k < iterations; ++k) total += at(k);
  return total;
}

void EpisodeSchedule::check(int iterations) const {
  for (int k = 0; k < iterations; ++k) {
    if (at(k) < 1) throw InvalidArgument("episode counts must be >= 1");
  }
}

void OmlConfig::check() const {
  if (!(alpha > 0.0)) throw InvalidArgument("alpha must be positive");
  if (!(eta >= 0.0)) throw InvalidArgument("eta must be nonnegative");
  if (outer_iterations < 0) {
    throw InvalidArgument("outer iterations must be nonnegative");
  }
  schedule.check(outer_iterations);
}

double theoretical_eta(int num_players, long total_episodes) {
  if (num_players < 1 || total_episodes < 1) {
    throw InvalidArgument("N and M must be positive");
  }
  return std::max(std::pow(static_cast<double>(num_players), -1.0 / 6.0),
                  std::pow(static_cast<double>(total_episodes), -1.0 / 12.0));
}

ExploitabilityOracle true_model_oracle(const MfgModel& model) {
  return [model](const Policy& pi) { return exploitability(model, pi); };
}

OmlResult run_mf_oml(const NPlayerGame& game, const OmlConfig& config,
                     const ExploitabilityOracle& oracle, bool keep_batches) {
  config.check();
  // Everything the learner may know about the game.
  const Dims dims = game.model().dims();
  const double r_max = game.model().r_max();
  ApproxProblem problem{dims, game.initial_distribution(), r_max};

  OmlResult result;
  std::vector<ExplorationBatch> history;
  ApproximationOracle estimate = [&](int k, const MeanFieldFlow&,
                                     const Policy& pi) {
    ExplorationBatch batch =
        sample_explore(game, pi, config.schedule.at(k), k, config.num_threads);
    const RewardEstimate rewards = estimate_rewards(batch, dims);
    history.push_back(std::move(batch));
    const std::span<const ExplorationBatch> pooled =
        config.full_history
            ? std::span<const ExplorationBatch>(history)
            : std::span<const ExplorationBatch>(&history.back(), 1);
    const TransitionEstimate transitions = estimate_transitions(pooled, dims);
    EstimatedModel est = assemble_estimates(rewards, transitions, r_max);
    if (!config.full_history && !keep_batches) history.clear();
    return OracleEstimate{std::move(est.c_hat), std::move(est.p_hat)};
  };

  SolverSchedule schedule;
  schedule.alpha = config.alpha;
  schedule.eta = config.eta;
  schedule.max_iterations = config.outer_iterations;
  SolverOptions options;
  options.projection = config.projection;

  // The first iterate is the uniform flow of each time slice.
  const MeanFieldFlow d0 = MeanFieldFlow::Uniform(dims);
  result.solver = solve_mfomi_fbs_approx(problem, estimate, schedule, d0,
                                         options, oracle);
  result.solver.algorithm = "mf-oml";
  if (keep_batches) result.batches = std::move(history);

  if (oracle) {
    // Iteration k's policy is executed in all of its n_k episodes.
    double cumulative = 0.0;
    long episode = 0;
    for (int k = 0; k < config.outer_iterations; ++k) {
      const double expl = result.solver.records[k].exploitability;
      for (int l = 0; l < config.schedule.at(k); ++l) {
        cumulative += expl;
        result.regret.records.push_back({episode++, k, expl, cumulative});
      }
    }
  }
  return result;
}

RegretReport regret_report(const RegretTrace& trace, int window) {
  const auto& rec = trace.records;
  if (rec.size() < 10) {
    throw InvalidArgument("regret report needs at least 10 episodes, got " +
                          std::to_string(rec.size()));
  }
  if (window < 1) throw InvalidArgument("window must be >= 1");
  RegretReport report;
  report.final_regret = rec.back().cumulative_regret;
  for (size_t start = 0; start < rec.size(); start += window) {
    const size_t end = std::min(rec.size(), start + window);
    double total = 0.0;
    for (size_t i = start; i < end; ++i) total += rec[i].exploitability;
    report.window_means.push_back(total / (end - start));
  }
  // ExplRegret(M) covers episodes 0..M-1, i.e. record M-1.
  const size_t total = rec.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (size_t m = (total + 1) / 2; m <= total; ++m) {
    const double regret = rec[m - 1].cumulative_regret;
    if (!(regret > 0.0)) continue;
    const double x = std::log(static_cast<double>(m));
    const double y = std::log(regret);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  const double denom = n * sxx - sx * sx;
  report.growth_exponent = n >= 2 && denom > 0.0
                               ? (n * sxy - sx * sy) / denom
                               : std::numeric_limits<double>::quiet_NaN();
  return report;
}

}  // namespace mfoml
