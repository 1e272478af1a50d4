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

#include "mfoml/dynamics.h"

#include <cmath>
#include <utility>

namespace mfoml {
namespace {

// mu_{t+1}(s') = sum_{s,a} P_t(s'|s,a) L_t(s,a) for one stage laid out
// (s, a, s').
void push_forward(const Dims& dims, std::span<const double> stage,
                  std::span<const double> flow_t, std::vector<double>& next) {
  const int S = dims.num_states;
  const int A = dims.num_actions;
  std::fill(next.begin(), next.end(), 0.0);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      const double mass = flow_t[dims.slice_index(s, a)];
      if (mass == 0.0) continue;
      const double* row = stage.data() + (static_cast<size_t>(s) * A + a) * S;
      for (int n = 0; n < S; ++n) next[n] += mass * row[n];
    }
  }
}

void check_policy(const Policy& policy, const Dims& dims) {
  if (policy.dims() != dims) {
    throw InvalidArgument("policy shape does not match the model");
  }
}

}  // namespace

MeanFieldFlow forward_flow(const Policy& policy, const TransitionTensor& p,
                           const Eigen::VectorXd& mu0) {
  const Dims& dims = policy.dims();
  if (p.num_states() != dims.num_states || p.num_actions() != dims.num_actions ||
      p.stages() != dims.horizon - 1 || mu0.size() != dims.num_states) {
    throw InvalidArgument("transition tensor or mu0 shape mismatch");
  }
  MeanFieldFlow flow(dims);
  std::vector<double> mu(mu0.data(), mu0.data() + mu0.size());
  for (int t = 0; t < dims.horizon; ++t) {
    if (t > 0) push_forward(dims, p.stage(t - 1), flow.slice(t - 1), mu);
    for (int s = 0; s < dims.num_states; ++s) {
      for (int a = 0; a < dims.num_actions; ++a) {
        flow(t, s, a) = mu[s] * policy(t, s, a);
      }
    }
  }
  return flow;
}

MeanFieldFlow forward_flow(const Policy& policy, const MfgModel& model) {
  check_policy(policy, model.dims());
  return forward_flow(policy, model.fixed_transitions(), model.mu0());
}

MeanFieldFlow induced_flow(const Policy& policy, const MfgModel& model) {
  if (model.has_fixed_transitions()) return forward_flow(policy, model);
  check_policy(policy, model.dims());
  const Dims& dims = model.dims();
  MeanFieldFlow flow(dims);
  std::vector<double> mu(model.mu0().data(),
                         model.mu0().data() + dims.num_states);
  std::vector<double> stage(static_cast<size_t>(dims.state_actions()) *
                            dims.num_states);
  for (int t = 0; t < dims.horizon; ++t) {
    if (t > 0) {
      model.transition_stage(t - 1, flow.slice(t - 1), stage);
      push_forward(dims, stage, flow.slice(t - 1), mu);
    }
    for (int s = 0; s < dims.num_states; ++s) {
      for (int a = 0; a < dims.num_actions; ++a) {
        flow(t, s, a) = mu[s] * policy(t, s, a);
      }
    }
  }
  return flow;
}

Policy normalize(const MeanFieldFlow& d, const std::optional<Policy>& tie_break) {
  const Dims& dims = d.dims();
  if (tie_break.has_value() && tie_break->dims() != dims) {
    throw InvalidArgument("tie-break policy shape does not match the flow");
  }
  if ((d.flat().array() < 0.0).any()) {
    throw InvalidArgument("cannot normalize a flow with negative entries");
  }
  Policy policy = uniform_policy(dims);
  for (int t = 0; t < dims.horizon; ++t) {
    for (int s = 0; s < dims.num_states; ++s) {
      const double mass = d.state_mass(t, s);
      for (int a = 0; a < dims.num_actions; ++a) {
        if (mass > 0.0) {
          policy(t, s, a) = d(t, s, a) / mass;
        } else if (tie_break.has_value()) {
          policy(t, s, a) = (*tie_break)(t, s, a);
        }
      }
    }
  }
  return policy;
}

bool FlowPolytope::same_pattern(const FlowPolytope& other) const {
  if (a_matrix.rows() != other.a_matrix.rows() ||
      a_matrix.cols() != other.a_matrix.cols() ||
      a_matrix.nonZeros() != other.a_matrix.nonZeros()) {
    return false;
  }
  const auto* o1 = a_matrix.outerIndexPtr();
  const auto* o2 = other.a_matrix.outerIndexPtr();
  if (!std::equal(o1, o1 + a_matrix.outerSize() + 1, o2)) return false;
  const auto* i1 = a_matrix.innerIndexPtr();
  const auto* i2 = other.a_matrix.innerIndexPtr();
  return std::equal(i1, i1 + a_matrix.nonZeros(), i2);
}

FlowPolytope assemble_polytope(const Dims& dims, const TransitionTensor& p,
                               const Eigen::VectorXd& mu0, bool dense_blocks) {
  dims.check();
  if (p.num_states() != dims.num_states || p.num_actions() != dims.num_actions ||
      p.stages() != dims.horizon - 1 || mu0.size() != dims.num_states) {
    throw InvalidArgument("transition tensor or mu0 shape mismatch");
  }
  const int S = dims.num_states;
  const int A = dims.num_actions;
  const int T = dims.horizon;
  FlowPolytope poly;
  poly.dims = dims;
  poly.dense_blocks = dense_blocks;

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<size_t>(T) * S * A * (S + 1));
  for (int t = 0; t + 1 < T; ++t) {
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const int col = dims.index(t, s, a);
        auto row = p.row(t, s, a);
        for (int n = 0; n < S; ++n) {
          if (dense_blocks || row[n] != 0.0) {
            entries.emplace_back(poly.row_index(t, n), col, row[n]);
          }
        }
      }
    }
    for (int n = 0; n < S; ++n) {
      for (int a = 0; a < A; ++a) {
        entries.emplace_back(poly.row_index(t, n), dims.index(t + 1, n, a),
                             -1.0);
      }
    }
  }
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      entries.emplace_back(poly.row_index(T - 1, s), dims.index(0, s, a), 1.0);
    }
  }
  poly.a_matrix.resize(S * T, dims.flat_size());
  poly.a_matrix.setFromTriplets(entries.begin(), entries.end());
  poly.a_matrix.makeCompressed();
  poly.b_vector = Eigen::VectorXd::Zero(S * T);
  poly.b_vector.tail(S) = mu0;
  return poly;
}

FlowPolytope assemble_polytope(const MfgModel& model) {
  return assemble_polytope(model.dims(), model.fixed_transitions(),
                           model.mu0());
}

FlowPolytope assemble_polytope_at(const MfgModel& model,
                                  const MeanFieldFlow& anchor) {
  if (anchor.dims() != model.dims()) {
    throw InvalidArgument("anchor flow shape does not match the model");
  }
  if (model.has_fixed_transitions()) return assemble_polytope(model);
  return assemble_polytope(model.dims(), model.transitions_at(anchor),
                           model.mu0(), /*dense_blocks=*/true);
}

int ReachabilitySets::count() const {
  int n = 0;
  for (const auto& row : unreachable) {
    for (bool u : row) n += u;
  }
  return n;
}

ReachabilitySets reachability(const Dims& dims, const TransitionTensor& p,
                              const Eigen::VectorXd& mu0) {
  const int S = dims.num_states;
  ReachabilitySets out;
  out.unreachable.assign(dims.horizon, std::vector<bool>(S, true));
  for (int s = 0; s < S; ++s) out.unreachable[0][s] = !(mu0[s] > 0.0);
  for (int t = 0; t + 1 < dims.horizon; ++t) {
    for (int s = 0; s < S; ++s) {
      if (out.unreachable[t][s]) continue;
      for (int a = 0; a < dims.num_actions; ++a) {
        auto row = p.row(t, s, a);
        for (int n = 0; n < S; ++n) {
          if (row[n] > 0.0) out.unreachable[t + 1][n] = false;
        }
      }
    }
  }
  return out;
}

ReachabilitySets reachability(const MfgModel& model) {
  return reachability(model.dims(), model.fixed_transitions(), model.mu0());
}

MfgModel apply_default_modification(const MfgModel& model,
                                    const ReachabilitySets& reach,
                                    const std::optional<Eigen::VectorXd>& p0) {
  const Dims dims = model.dims();
  const int S = dims.num_states;
  const int A = dims.num_actions;
  if (static_cast<int>(reach.unreachable.size()) != dims.horizon) {
    throw InvalidArgument("reachability sets do not match the horizon");
  }
  Eigen::VectorXd fallback =
      p0.value_or(Eigen::VectorXd::Constant(S, 1.0 / S));
  if (fallback.size() != S) throw InvalidArgument("p0 has the wrong length");

  RewardFn base_reward = model.reward_fn();
  RewardFn reward = [base_reward, reach, dims](int t,
                                               std::span<const double> flow_t,
                                               std::span<double> out) {
    base_reward(t, flow_t, out);
    for (int s = 0; s < dims.num_states; ++s) {
      if (!reach.unreachable[t][s]) continue;
      for (int a = 0; a < dims.num_actions; ++a) {
        out[dims.slice_index(s, a)] = 0.0;
      }
    }
  };

  auto overwrite = [reach, fallback, S, A](int t, std::span<double> stage) {
    for (int s = 0; s < S; ++s) {
      if (!reach.unreachable[t][s]) continue;
      for (int a = 0; a < A; ++a) {
        double* row = stage.data() + (static_cast<size_t>(s) * A + a) * S;
        for (int n = 0; n < S; ++n) row[n] = fallback[n];
      }
    }
  };

  if (model.has_fixed_transitions()) {
    TransitionTensor p = model.fixed_transitions();
    for (int t = 0; t < p.stages(); ++t) overwrite(t, p.stage(t));
    return MfgModel(dims, model.mu0(), std::move(reward), std::move(p),
                    model.constants());
  }
  TransitionFn base = model.transition_fn();
  TransitionFn transitions = [base, overwrite](int t,
                                               std::span<const double> flow_t,
                                               std::span<double> out) {
    base(t, flow_t, out);
    overwrite(t, out);
  };
  return MfgModel(dims, model.mu0(), std::move(reward), std::move(transitions),
                  model.constants());
}

}  // namespace mfoml
