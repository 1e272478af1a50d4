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

#ifndef MFOML_NPLAYER_H_
#define MFOML_NPLAYER_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mfoml/model.h"

namespace mfoml {

// Deterministic per-(seed, k, l) stream seed, so episodes can run in any
// order or in parallel with identical results.
uint64_t stream_seed(uint64_t seed, uint64_t k, uint64_t l);

// RAII marker for code running inside the episode simulator. Lets tests
// check that model reads happen only there.
class SimulationScope {
 public:
  SimulationScope();
  ~SimulationScope();
  SimulationScope(const SimulationScope&) = delete;
  SimulationScope& operator=(const SimulationScope&) = delete;
  static bool active();
};

struct Step {
  int state = 0;
  int action = 0;
  double reward = 0.0;
  // -1 at the final step.
  int next_state = -1;
};

using Trajectory = std::vector<Step>;

// Symmetric N-player game built on a mean-field model. Every episode starts
// from the same initial profile.
class NPlayerGame {
 public:
  NPlayerGame(MfgModel model, int num_players, uint64_t seed,
              double reward_noise = 0.0,
              std::optional<std::vector<int>> initial_profile = std::nullopt);

  const MfgModel& model() const { return model_; }
  int num_players() const { return num_players_; }
  uint64_t seed() const { return seed_; }
  double reward_noise() const { return reward_noise_; }
  const std::vector<int>& initial_profile() const { return initial_profile_; }
  // Empirical distribution of the initial profile.
  Eigen::VectorXd initial_distribution() const;

 private:
  MfgModel model_;
  int num_players_;
  uint64_t seed_;
  double reward_noise_;
  std::vector<int> initial_profile_;
};

struct EpisodeOutcome {
  std::vector<Trajectory> trajectories;  // one per agent
  // Empirical state-action distribution per step (N-player flow).
  MeanFieldFlow empirical_flow;
};

// One episode with agent i playing policies[i].
EpisodeOutcome play_episode(const NPlayerGame& game,
                            std::span<const Policy> policies,
                            std::mt19937_64& rng);

struct EpisodeRecord {
  int explorer = 0;
  Trajectory steps;
};

struct ExplorationBatch {
  int iteration = 0;
  std::vector<EpisodeRecord> episodes;
};

// n_k episodes; in each, a uniformly drawn agent plays the uniform policy and
// all others play `policy`. Only the explorer's trajectory is kept. Episode
// l draws from stream_seed(game.seed(), k, l).
ExplorationBatch sample_explore(const NPlayerGame& game, const Policy& policy,
                                int n_k, int k, int num_threads = 1);

// One JSON object per line, one line per episode.
void write_batch_jsonl(const ExplorationBatch& batch, std::ostream& out);
std::vector<ExplorationBatch> read_batches_jsonl(std::istream& in);

struct RewardEstimate {
  Dims dims;
  Eigen::VectorXd mean;    // flow layout; 0 where unvisited
  Eigen::VectorXi counts;  // flow layout
};

// Per-(t, s, a) sample mean of explorer rewards in one batch.
RewardEstimate estimate_rewards(const ExplorationBatch& batch,
                                const Dims& dims);

struct TransitionEstimate {
  TransitionTensor p;
  // Visits of (t, s, a) pooled over the batches, TransitionTensor row order.
  std::vector<long> counts;
};

// Conditional next-state frequencies pooled over `batches`; rows without data
// equal p0 (uniform when absent).
TransitionEstimate estimate_transitions(
    std::span<const ExplorationBatch> batches, const Dims& dims,
    const std::optional<Eigen::VectorXd>& p0 = std::nullopt);

struct EstimatedModel {
  Eigen::VectorXd c_hat;  // -R_hat, clamped to [-r_max, r_max]
  TransitionTensor p_hat;
  Eigen::VectorXi visit_counts;
  std::vector<long> cumulative_counts;
};

EstimatedModel assemble_estimates(const RewardEstimate& rewards,
                                  const TransitionEstimate& transitions,
                                  double r_max);

// Smallest exploration occupation d_t(s, a) over states reachable at t, under
// the uniform policy. Mean-field-dependent transitions are anchored at
// `population` (default: the flow of the uniform policy).
double exploration_p_min(const MfgModel& model,
                         const std::optional<MeanFieldFlow>& population =
                             std::nullopt);

struct EstimationErrorBound {
  double epsilon1 = 0.0;
  double epsilon2 = 0.0;
  double delta = 0.05;
  double p_min = 0.0;
  // n_k > 2 log(2/delta) / p_min^2.
  bool precondition_met = false;
};

struct ErrorBoundInputs {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  int num_players = 1;
  double c_r = 0.0;
  double r_max = 1.0;
  double p_min = 0.0;
  double delta = 0.05;
  long n_k = 0;
  long cumulative_n = 0;
};

// High-probability bounds on |c_hat - c|_2 (epsilon1) and on the row
// l1 error of P_hat (epsilon2).
EstimationErrorBound error_bounds(const ErrorBoundInputs& in);

// Per-entry reward estimation bound: mean-field term + concentration term +
// C_R * execution_error.
double reward_error_bound(const ErrorBoundInputs& in, double execution_error);

}  // namespace mfoml

#endif  // MFOML_NPLAYER_H_
