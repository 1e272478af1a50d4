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

#include "mfoml/evaluation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "mfoml/dynamics.h"

namespace mfoml {

InducedMdpSolution solve_induced_mdp(const MfgModel& model,
                                     const MeanFieldFlow& flow) {
  const Dims& dims = model.dims();
  if (flow.dims() != dims) {
    throw InvalidArgument("flow shape does not match the model");
  }
  const int S = dims.num_states;
  const int A = dims.num_actions;
  const int T = dims.horizon;
  const TransitionTensor p = model.transitions_at(flow);

  InducedMdpSolution out;
  out.q_values = Eigen::VectorXd::Zero(dims.flat_size());
  out.state_values = Eigen::VectorXd::Zero(S * T);
  Eigen::VectorXd greedy = Eigen::VectorXd::Zero(dims.flat_size());
  std::vector<double> reward(dims.state_actions());

  for (int t = T - 1; t >= 0; --t) {
    model.reward_slice(t, flow.slice(t), reward);
    for (int s = 0; s < S; ++s) {
      int best = 0;
      double best_q = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < A; ++a) {
        double q = reward[dims.slice_index(s, a)];
        if (t + 1 < T) {
          auto row = p.row(t, s, a);
          for (int n = 0; n < S; ++n) {
            q += row[n] * out.state_values[(t + 1) * S + n];
          }
        }
        out.q_values[dims.index(t, s, a)] = q;
        if (q > best_q) {
          best_q = q;
          best = a;
        }
      }
      out.state_values[t * S + s] = best_q;
      greedy[dims.index(t, s, best)] = 1.0;
    }
  }
  out.optimal_policy = Policy(dims, std::move(greedy));
  for (int s = 0; s < S; ++s) {
    out.optimal_value += model.mu0()[s] * out.state_values[s];
  }
  return out;
}

Eigen::VectorXd policy_q_values(const MfgModel& model, const Policy& policy,
                                const MeanFieldFlow& flow) {
  const Dims& dims = model.dims();
  if (flow.dims() != dims || policy.dims() != dims) {
    throw InvalidArgument("policy or flow shape does not match the model");
  }
  const int S = dims.num_states;
  const int A = dims.num_actions;
  const TransitionTensor p = model.transitions_at(flow);
  Eigen::VectorXd q(dims.flat_size());
  std::vector<double> reward(dims.state_actions());
  std::vector<double> next_v(S, 0.0), v(S, 0.0);
  for (int t = dims.horizon - 1; t >= 0; --t) {
    model.reward_slice(t, flow.slice(t), reward);
    for (int s = 0; s < S; ++s) {
      v[s] = 0.0;
      for (int a = 0; a < A; ++a) {
        double value = reward[dims.slice_index(s, a)];
        if (t + 1 < dims.horizon) {
          auto row = p.row(t, s, a);
          for (int n = 0; n < S; ++n) value += row[n] * next_v[n];
        }
        q[dims.index(t, s, a)] = value;
        v[s] += policy(t, s, a) * value;
      }
    }
    std::swap(v, next_v);
  }
  return q;
}

double policy_value(const MfgModel& model, const Policy& policy,
                    const MeanFieldFlow& flow) {
  const Dims& dims = model.dims();
  if (flow.dims() != dims || policy.dims() != dims) {
    throw InvalidArgument("policy or flow shape does not match the model");
  }
  const MeanFieldFlow occupation =
      forward_flow(policy, model.transitions_at(flow), model.mu0());
  std::vector<double> reward(dims.state_actions());
  double total = 0.0;
  for (int t = 0; t < dims.horizon; ++t) {
    model.reward_slice(t, flow.slice(t), reward);
    auto occ = occupation.slice(t);
    for (int i = 0; i < dims.state_actions(); ++i) total += reward[i] * occ[i];
  }
  return total;
}

double exploitability(const MfgModel& model, const Policy& policy,
                      const MeanFieldFlow& induced) {
  const double best = solve_induced_mdp(model, induced).optimal_value;
  const double own = policy_value(model, policy, induced);
  return std::max(0.0, best - own);
}

double exploitability(const MfgModel& model, const Policy& policy) {
  return exploitability(model, policy, induced_flow(policy, model));
}

Policy random_policy(const Dims& dims, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> gamma(1.0, 1.0);
  Eigen::VectorXd values(dims.flat_size());
  for (int t = 0; t < dims.horizon; ++t) {
    for (int s = 0; s < dims.num_states; ++s) {
      double total = 0.0;
      for (int a = 0; a < dims.num_actions; ++a) {
        const double g = gamma(rng);
        values[dims.index(t, s, a)] = g;
        total += g;
      }
      for (int a = 0; a < dims.num_actions; ++a) {
        values[dims.index(t, s, a)] /= total;
      }
    }
  }
  return Policy(dims, std::move(values));
}

namespace {

Eigen::VectorXd reward_vector(const MfgModel& model, const MeanFieldFlow& flow) {
  const Dims& dims = model.dims();
  Eigen::VectorXd out(dims.flat_size());
  for (int t = 0; t < dims.horizon; ++t) {
    model.reward_slice(t, flow.slice(t),
                       std::span<double>(out.data() + t * dims.state_actions(),
                                         dims.state_actions()));
  }
  return out;
}

}  // namespace

ProbeReport monotonicity_probe(const MfgModel& model, int num_pairs,
                               uint64_t rng_seed) {
  const Dims& dims = model.dims();
  std::mt19937_64 rng(rng_seed);
  ProbeReport report;
  report.estimated_lambda = std::numeric_limits<double>::infinity();
  for (int i = 0; i < num_pairs; ++i) {
    const MeanFieldFlow l1 = induced_flow(random_policy(dims, rng()), model);
    const MeanFieldFlow l2 = induced_flow(random_policy(dims, rng()), model);
    const Eigen::VectorXd diff = l1.flat() - l2.flat();
    const double sq = diff.squaredNorm();
    if (sq < 1e-14) continue;
    // c = -R, so <c1 - c2, dL> = -<R1 - R2, dL>.
    const double inner =
        -(reward_vector(model, l1) - reward_vector(model, l2)).dot(diff);
    const double ratio = inner / sq;
    ++report.num_samples;
    if (ratio < report.estimated_lambda) {
      report.estimated_lambda = ratio;
      report.worst_violation_pair.emplace(l1, l2);
    }
  }
  if (report.num_samples == 0) report.estimated_lambda = 0.0;
  return report;
}

ProbeReport lipschitz_probe(const MfgModel& model, int num_pairs,
                            uint64_t rng_seed) {
  const Dims& dims = model.dims();
  std::mt19937_64 rng(rng_seed);
  ProbeReport report;
  std::vector<double> r1(dims.state_actions()), r2(dims.state_actions());
  for (int i = 0; i < num_pairs; ++i) {
    const MeanFieldFlow l1 = induced_flow(random_policy(dims, rng()), model);
    const MeanFieldFlow l2 = induced_flow(random_policy(dims, rng()), model);
    for (int t = 0; t < dims.horizon; ++t) {
      auto s1 = l1.slice(t);
      auto s2 = l2.slice(t);
      double dist = 0.0;
      for (int j = 0; j < dims.state_actions(); ++j) {
        dist += std::abs(s1[j] - s2[j]);
      }
      if (dist < 1e-12) continue;
      model.reward_slice(t, s1, r1);
      model.reward_slice(t, s2, r2);
      ++report.num_samples;
      for (int j = 0; j < dims.state_actions(); ++j) {
        const double ratio = std::abs(r1[j] - r2[j]) / dist;
        if (ratio > report.estimated_c_r) {
          report.estimated_c_r = ratio;
          report.worst_violation_pair.emplace(l1, l2);
        }
      }
    }
  }
  return report;
}

}  // namespace mfoml
