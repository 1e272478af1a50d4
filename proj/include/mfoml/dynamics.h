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

#ifndef MFOML_DYNAMICS_H_
#define MFOML_DYNAMICS_H_

#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "mfoml/model.h"

namespace mfoml {

// Flow induced by `policy` under fixed transitions. Rejects mean-field
// dependent models.
MeanFieldFlow forward_flow(const Policy& policy, const MfgModel& model);
MeanFieldFlow forward_flow(const Policy& policy, const TransitionTensor& p,
                           const Eigen::VectorXd& mu0);

// Flow induced by `policy` when every stage is anchored at the population's
// own current slice: L_{t+1} uses P_t(. | ., ., L_t). Equals forward_flow for
// fixed transitions.
MeanFieldFlow induced_flow(const Policy& policy, const MfgModel& model);

// Per-state renormalization of an occupation measure. States with zero mass
// take the matching row of `tie_break` (uniform when absent).
Policy normalize(const MeanFieldFlow& d,
                 const std::optional<Policy>& tie_break = std::nullopt);

// {d | A d = b, d >= 0}. Row block t < T-1 holds W_t in column block t and -Z
// in column block t+1; the final row block holds Z in column block 0.
struct FlowPolytope {
  Dims dims;
  Eigen::SparseMatrix<double, Eigen::ColMajor> a_matrix;
  Eigen::VectorXd b_vector;
  // True when every W_t entry is stored, including zeros, so polytopes for
  // different transition values share one sparsity pattern.
  bool dense_blocks = false;

  int num_rows() const { return static_cast<int>(a_matrix.rows()); }
  int num_cols() const { return static_cast<int>(a_matrix.cols()); }
  // Row of the constraint coupling next state s' between t and t+1.
  int row_index(int t, int next_state) const {
    return t * dims.num_states + next_state;
  }
  bool same_pattern(const FlowPolytope& other) const;
};

FlowPolytope assemble_polytope(const Dims& dims, const TransitionTensor& p,
                               const Eigen::VectorXd& mu0,
                               bool dense_blocks = false);
// Requires fixed transitions.
FlowPolytope assemble_polytope(const MfgModel& model);
// W_t built from P_t anchored at anchor_t. Always stores dense W blocks for
// mean-field-dependent models; fixed models ignore the anchor.
FlowPolytope assemble_polytope_at(const MfgModel& model,
                                  const MeanFieldFlow& anchor);

struct ReachabilitySets {
  // unreachable[t][s]
  std::vector<std::vector<bool>> unreachable;

  bool is_unreachable(int t, int s) const { return unreachable[t][s]; }
  int count() const;
};

ReachabilitySets reachability(const Dims& dims, const TransitionTensor& p,
                              const Eigen::VectorXd& mu0);
// Requires fixed transitions.
ReachabilitySets reachability(const MfgModel& model);

// Replaces transitions at unreachable (t, s) by `p0` for every action and the
// rewards there by zero. `p0` defaults to uniform over states.
MfgModel apply_default_modification(
    const MfgModel& model, const ReachabilitySets& reach,
    const std::optional<Eigen::VectorXd>& p0 = std::nullopt);

}  // namespace mfoml

#endif  // MFOML_DYNAMICS_H_
