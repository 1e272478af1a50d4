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

#ifndef MFOML_SOLVER_H_
#define MFOML_SOLVER_H_

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfoml/model.h"
#include "mfoml/projection.h"

namespace mfoml {

struct SolverSchedule {
  double alpha = 0.1;
  double eta = 0.0;
  int max_iterations = 1000;
  std::optional<double> stop_exploitability;
  // Stops once cumulative solver time exceeds this many seconds.
  std::optional<double> max_seconds;
  // Contraction factor of the squared distance per step, when the schedule
  // came from a strongly monotone model.
  std::optional<double> kappa;

  void check() const;
};

// Step sizes from the convergence analysis. With lambda > 0:
//   alpha = lambda / (2 C^2 S^2 A^2), eta = 0, kappa = lambda^2/(2 C^2 S^2 A^2).
// With lambda = 0 a target accuracy epsilon is required:
//   alpha = eps / (8 C^2 S^2 A^2 T + eps^2 / (2T)), eta = eps / (4T).
SolverSchedule derive_schedule(double c_r, int num_states, int num_actions,
                               int horizon, double lambda,
                               std::optional<double> epsilon = std::nullopt);

// Negated expected rewards at `flow`, flattened like the flow.
Eigen::VectorXd cost_vector(const MfgModel& model, const MeanFieldFlow& flow);

// Which flow anchors mean-field-dependent transitions when the polytope is
// re-assembled each iteration.
enum class AnchorMode {
  // The current iterate d^k. Fixed points are then consistent with the
  // transitions they induce.
  kCurrentIterate,
  // The gradient-step point d^k - alpha (c + eta d^k).
  kStepTarget,
};

struct SolverOptions {
  ProjectionSettings projection;
  // Evaluate exploitability every `exploitability_stride` iterations (and at
  // the last one).
  int exploitability_stride = 1;
  bool record_iterates = false;
  AnchorMode anchor = AnchorMode::kCurrentIterate;
};

struct SolverRecord {
  int iteration = 0;
  // NaN when not evaluated at this iteration.
  double exploitability = 0.0;
  // Cumulative solver time, excluding exploitability evaluation.
  double elapsed_seconds = 0.0;
  int inner_iterations = 0;
};

struct SolverTrace {
  std::vector<SolverRecord> records;
  // Filled only with SolverOptions::record_iterates.
  std::vector<MeanFieldFlow> iterates;
  std::vector<Policy> policies;
  MeanFieldFlow final_flow;
  Policy final_policy;
  bool converged = false;
  // Mean-field-dependent transitions: the re-anchored polytope has no
  // convergence guarantee, so results are heuristic.
  bool heuristic = false;
  std::string algorithm = "mfomi-fbs";

  long total_inner_iterations() const;
  // First iteration with exploitability <= threshold, if any.
  std::optional<int> first_below(double threshold) const;
  double final_exploitability() const;
};

// Thrown when a projection fails inside the loop; carries the outer index.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, int iteration)
      : std::runtime_error(what), iteration(iteration) {}
  int iteration;
};

// Forward-backward splitting on the occupation-measure inclusion:
//   d~ = d - alpha (c(d) + eta d),  d <- argmin_{A d = b, d >= 0} |d - d~|.
SolverTrace solve_mfomi_fbs(const MfgModel& model,
                            const SolverSchedule& schedule,
                            const Policy& initial_policy,
                            const SolverOptions& options = {});

struct OracleEstimate {
  Eigen::VectorXd cost;
  TransitionTensor transitions;
};

// Returns the cost and transition estimates used at iteration k, given the
// current iterate and its extracted policy.
using ApproximationOracle = std::function<OracleEstimate(
    int k, const MeanFieldFlow& iterate, const Policy& policy)>;

// Exploitability of a policy under some reference model. Optional.
using PolicyEvaluator = std::function<double(const Policy&)>;

struct ApproxProblem {
  Dims dims;
  Eigen::VectorXd mu0;
  double r_max = 1.0;
};

// Same loop with the cost and polytope supplied by `oracle` every iteration.
// Estimates are validated (|cost|_inf <= r_max, row-stochastic transitions).
SolverTrace solve_mfomi_fbs_approx(const ApproxProblem& problem,
                                   const ApproximationOracle& oracle,
                                   const SolverSchedule& schedule,
                                   const MeanFieldFlow& initial_flow,
                                   const SolverOptions& options = {},
                                   const PolicyEvaluator& evaluator = nullptr);

}  // namespace mfoml

#endif  // MFOML_SOLVER_H_
