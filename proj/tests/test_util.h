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

// Random instances and independent reference implementations shared by the
// unit tests and the acceptance binary. The oracles deliberately avoid the
// library's own algorithms.

#ifndef MFOML_TESTS_TEST_UTIL_H_
#define MFOML_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mfoml/model.h"

namespace mfoml::testing {

inline Eigen::VectorXd random_simplex(int n, std::mt19937_64& rng) {
  std::gamma_distribution<double> gamma(1.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = gamma(rng) + 1e-12;
  return v / v.sum();
}

// Row-stochastic tensor with T-1 stages. With `sparsity` > 0 each entry is
// zeroed with that probability (at least one entry per row survives).
inline TransitionTensor random_transitions(int s, int a, int t,
                                           std::mt19937_64& rng,
                                           double sparsity = 0.0) {
  TransitionTensor p(s, a, std::max(t - 1, 0));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k + 1 < t; ++k) {
    for (int i = 0; i < s; ++i) {
      for (int j = 0; j < a; ++j) {
        Eigen::VectorXd row = random_simplex(s, rng);
        if (sparsity > 0.0) {
          const int keep = static_cast<int>(rng() % s);
          for (int n = 0; n < s; ++n) {
            if (n != keep && u(rng) < sparsity) row[n] = 0.0;
          }
          row /= row.sum();
        }
        for (int n = 0; n < s; ++n) p(k, i, j, n) = row[n];
      }
    }
  }
  return p;
}

inline Policy random_test_policy(const Dims& dims, std::mt19937_64& rng) {
  Policy pi(dims, Eigen::VectorXd::Zero(dims.flat_size()));
  for (int t = 0; t < dims.horizon; ++t) {
    for (int s = 0; s < dims.num_states; ++s) {
      const Eigen::VectorXd row = random_simplex(dims.num_actions, rng);
      for (int a = 0; a < dims.num_actions; ++a) pi(t, s, a) = row[a];
    }
  }
  return pi;
}

// R_t(s,a,L) = base(t,s,a) - lambda * L_t(s,a).
inline MfgModel monotone_model(const Dims& dims, TransitionTensor p,
                               Eigen::VectorXd mu0, Eigen::VectorXd base,
                               double lambda) {
  const int sa = dims.state_actions();
  RewardFn reward = [base, lambda, sa](int t, std::span<const double> flow,
                                       std::span<double> out) {
    for (int i = 0; i < sa; ++i) out[i] = base[t * sa + i] - lambda * flow[i];
  };
  MfgModel::Constants c;
  c.r_max = base.cwiseAbs().maxCoeff() + std::abs(lambda) + 1e-12;
  c.lipschitz_c_r = std::abs(lambda);
  c.monotone_lambda = lambda;
  return MfgModel(dims, std::move(mu0), reward, std::move(p), c);
}

inline MfgModel random_monotone_model(const Dims& dims, double lambda,
                                      std::mt19937_64& rng,
                                      double base_scale = 1.0) {
  std::normal_distribution<double> n(0.0, base_scale);
  Eigen::VectorXd base(dims.flat_size());
  for (int i = 0; i < base.size(); ++i) base[i] = n(rng);
  return monotone_model(dims,
                        random_transitions(dims.num_states, dims.num_actions,
                                           dims.horizon, rng),
                        random_simplex(dims.num_states, rng), base, lambda);
}

// Flow by explicit state-distribution recursion with dense matrices.
inline Eigen::VectorXd oracle_forward_flow(const Policy& pi,
                                           const TransitionTensor& p,
                                           const Eigen::VectorXd& mu0) {
  const Dims& d = pi.dims();
  const int s_n = d.num_states, a_n = d.num_actions;
  Eigen::VectorXd out(d.flat_size());
  Eigen::VectorXd mu = mu0;
  for (int t = 0; t < d.horizon; ++t) {
    Eigen::MatrixXd pol(s_n, a_n);
    for (int s = 0; s < s_n; ++s)
      for (int a = 0; a < a_n; ++a) pol(s, a) = pi(t, s, a);
    const Eigen::MatrixXd joint = mu.asDiagonal() * pol;
    for (int s = 0; s < s_n; ++s)
      for (int a = 0; a < a_n; ++a) out[d.index(t, s, a)] = joint(s, a);
    if (t + 1 == d.horizon) break;
    Eigen::MatrixXd step = Eigen::MatrixXd::Zero(s_n, s_n);
    for (int s = 0; s < s_n; ++s)
      for (int a = 0; a < a_n; ++a)
        for (int n = 0; n < s_n; ++n) step(s, n) += pol(s, a) * p(t, s, a, n);
    mu = step.transpose() * mu;
  }
  return out;
}

// Dense constraint matrix built from the definition of a valid flow:
// sum_a L_{t+1}(s',a) = sum_{s,a} P_t(s'|s,a) L_t(s,a), sum_a L_0(s,a)=mu0(s).
inline void oracle_constraints(const Dims& d, const TransitionTensor& p,
                               const Eigen::VectorXd& mu0, Eigen::MatrixXd& a,
                               Eigen::VectorXd& b) {
  const int s_n = d.num_states, a_n = d.num_actions, t_n = d.horizon;
  a = Eigen::MatrixXd::Zero(s_n * t_n, d.flat_size());
  b = Eigen::VectorXd::Zero(s_n * t_n);
  int row = 0;
  for (int t = 0; t + 1 < t_n; ++t) {
    for (int n = 0; n < s_n; ++n, ++row) {
      for (int s = 0; s < s_n; ++s)
        for (int k = 0; k < a_n; ++k) a(row, d.index(t, s, k)) = p(t, s, k, n);
      for (int k = 0; k < a_n; ++k) a(row, d.index(t + 1, n, k)) -= 1.0;
    }
  }
  for (int s = 0; s < s_n; ++s, ++row) {
    for (int k = 0; k < a_n; ++k) a(row, d.index(0, s, k)) = 1.0;
    b[row] = mu0[s];
  }
}

// Exact Euclidean projection onto {x : Ax = b, x >= 0} by enumerating every
// zero pattern of x. Each pattern gives an equality-constrained least
// squares problem; the answer is the closest feasible candidate.
inline Eigen::VectorXd oracle_projection(const Eigen::MatrixXd& a,
                                         const Eigen::VectorXd& b,
                                         const Eigen::VectorXd& target) {
  const int n = static_cast<int>(target.size());
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x;
  for (long mask = 0; mask < (1L << n); ++mask) {
    std::vector<int> free;
    for (int i = 0; i < n; ++i)
      if (!(mask >> i & 1)) free.push_back(i);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    if (!free.empty()) {
      Eigen::MatrixXd af(a.rows(), free.size());
      Eigen::VectorXd tf(free.size());
      for (size_t j = 0; j < free.size(); ++j) {
        af.col(j) = a.col(free[j]);
        tf[j] = target[free[j]];
      }
      // x_F = t_F + A_F^T mu, with A_F A_F^T mu = b - A_F t_F (min-norm).
      const Eigen::MatrixXd gram = af * af.transpose();
      const Eigen::VectorXd mu =
          gram.completeOrthogonalDecomposition().solve(b - af * tf);
      const Eigen::VectorXd xf = tf + af.transpose() * mu;
      for (size_t j = 0; j < free.size(); ++j) x[free[j]] = xf[j];
    }
    if (x.minCoeff() < -1e-12) continue;
    if ((a * x - b).cwiseAbs().maxCoeff() > 1e-9) continue;
    const double dist = (x - target).squaredNorm();
    if (dist < best) {
      best = dist;
      best_x = x.cwiseMax(0.0);
    }
  }
  return best_x;
}

// Expected total reward of a deterministic policy (one action per (t, s))
// against a fixed flow.
inline double oracle_deterministic_value(const MfgModel& model,
                                         const Eigen::VectorXd& flow,
                                         const std::vector<int>& choice) {
  const Dims& d = model.dims();
  const TransitionTensor& p = model.fixed_transitions();
  const int sa = d.state_actions();
  Eigen::VectorXd mu = model.mu0();
  double value = 0.0;
  std::vector<double> r(sa);
  for (int t = 0; t < d.horizon; ++t) {
    model.reward_slice(t, std::span<const double>(flow.data() + t * sa, sa),
                       r);
    Eigen::VectorXd next = Eigen::VectorXd::Zero(d.num_states);
    for (int s = 0; s < d.num_states; ++s) {
      const int a = choice[t * d.num_states + s];
      value += mu[s] * r[d.slice_index(s, a)];
      if (t + 1 < d.horizon)
        for (int n = 0; n < d.num_states; ++n) next[n] += mu[s] * p(t, s, a, n);
    }
    mu = next;
  }
  return value;
}

// Best response value by enumerating all A^(S*T) deterministic policies.
inline double oracle_best_value(const MfgModel& model,
                                const Eigen::VectorXd& flow) {
  const Dims& d = model.dims();
  const int slots = d.num_states * d.horizon;
  std::vector<int> choice(slots, 0);
  double best = -std::numeric_limits<double>::infinity();
  while (true) {
    best = std::max(best, oracle_deterministic_value(model, flow, choice));
    int i = 0;
    while (i < slots && ++choice[i] == d.num_actions) choice[i++] = 0;
    if (i == slots) break;
  }
  return best;
}

}  // namespace mfoml::testing

#endif  // MFOML_TESTS_TEST_UTIL_H_
