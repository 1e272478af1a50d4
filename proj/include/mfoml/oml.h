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

#ifndef MFOML_OML_H_
#define MFOML_OML_H_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mfoml/nplayer.h"
#include "mfoml/projection.h"
#include "mfoml/solver.h"

namespace mfoml {

struct EpisodeSchedule {
  enum class Kind { kConstant, kCubic, kList };
  Kind kind = Kind::kConstant;
  int constant = 20;
  std::vector<int> list;

  // Episodes in outer iteration k (0-based). Cubic gives (k+1)^3.
  int at(int k) const;
  long cumulative(int iterations) const;
  void check(int iterations) const;
};

struct OmlConfig {
  double alpha = 0.02;
  double eta = 0.0;
  EpisodeSchedule schedule;
  int outer_iterations = 50;
  // Pool transition counts over every batch so far instead of only the
  // current one.
  bool full_history = false;
  int num_threads = 1;
  ProjectionSettings projection;

  void check() const;
};

// eta = max(N^{-1/6}, M^{-1/12}) for non-strongly-monotone games.
double theoretical_eta(int num_players, long total_episodes);

struct RegretRecord {
  long episode = 0;
  int iteration = 0;
  double exploitability = 0.0;
  double cumulative_regret = 0.0;
};

struct RegretTrace {
  std::vector<RegretRecord> records;
};

struct OmlResult {
  RegretTrace regret;  // empty when no evaluator is given
  SolverTrace solver;
  std::vector<ExplorationBatch> batches;  // only with keep_batches
};

// Evaluation-only capability: exploitability of a learner policy under the
// true model. The learner itself never calls it.
using ExploitabilityOracle = std::function<double(const Policy&)>;

ExploitabilityOracle true_model_oracle(const MfgModel& model);

// Runs the learner. It observes only exploration batches, the empirical
// initial distribution, the dimensions and r_max.
OmlResult run_mf_oml(const NPlayerGame& game, const OmlConfig& config,
                     const ExploitabilityOracle& oracle = nullptr,
                     bool keep_batches = false);

struct RegretReport {
  double growth_exponent = 0.0;
  // Mean exploitability per consecutive window of episodes.
  std::vector<double> window_means;
  double final_regret = 0.0;
};

// Least-squares slope of log ExplRegret(M) against log M over the trailing
// half of the trace. Requires at least 10 episodes.
RegretReport regret_report(const RegretTrace& trace, int window = 20);

}  // namespace mfoml

#endif  // MFOML_OML_H_
