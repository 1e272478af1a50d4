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

#ifndef MFOML_EVALUATION_H_
#define MFOML_EVALUATION_H_

#include <cstdint>
#include <optional>
#include <utility>

#include <Eigen/Dense>

#include "mfoml/model.h"

namespace mfoml {

// Backward induction in the MDP obtained by freezing the population flow L.
struct InducedMdpSolution {
  double optimal_value = 0.0;
  Policy optimal_policy;
  // Same flat layout as a flow.
  Eigen::VectorXd q_values;
  // Index t * S + s.
  Eigen::VectorXd state_values;

  double q(const Dims& dims, int t, int s, int a) const {
    return q_values[dims.index(t, s, a)];
  }
  double v(const Dims& dims, int t, int s) const {
    return state_values[t * dims.num_states + s];
  }
};

// Rewards are evaluated at L; mean-field-dependent transitions are anchored
// at L. Ties go to the lowest action index.
InducedMdpSolution solve_induced_mdp(const MfgModel& model,
                                     const MeanFieldFlow& flow);

// Q function of `policy` itself (not the optimum) in the MDP induced by
// `flow`, same flat layout as a flow.
Eigen::VectorXd policy_q_values(const MfgModel& model, const Policy& policy,
                                const MeanFieldFlow& flow);

// Expected total reward of `policy` in the MDP induced by `flow`.
double policy_value(const MfgModel& model, const Policy& policy,
                    const MeanFieldFlow& flow);

// Best-response gap against the flow the policy induces. For
// mean-field-dependent transitions the flow is propagated with each stage
// anchored at its own slice (see induced_flow). Clamped at zero.
double exploitability(const MfgModel& model, const Policy& policy);

// Same, against a flow the caller already computed for `policy`.
double exploitability(const MfgModel& model, const Policy& policy,
                      const MeanFieldFlow& induced);

struct ProbeReport {
  double estimated_c_r = 0.0;
  double estimated_lambda = 0.0;
  int num_samples = 0;
  std::optional<std::pair<MeanFieldFlow, MeanFieldFlow>> worst_violation_pair;
};

// Random policy with every pi_t(.|s) drawn from a flat Dirichlet.
Policy random_policy(const Dims& dims, uint64_t seed);

// min over sampled induced-flow pairs of <c(L1) - c(L2), L1 - L2> / |L1-L2|^2.
// A negative value flags a non-monotone reward.
ProbeReport monotonicity_probe(const MfgModel& model, int num_pairs,
                               uint64_t rng_seed);

// max over sampled pairs and (t, s, a) of |R_t(L1) - R_t(L2)| / |L1_t - L2_t|_1.
ProbeReport lipschitz_probe(const MfgModel& model, int num_pairs,
                            uint64_t rng_seed);

}  // namespace mfoml

#endif  // MFOML_EVALUATION_H_
