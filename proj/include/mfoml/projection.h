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

#ifndef MFOML_PROJECTION_H_
#define MFOML_PROJECTION_H_

#include <memory>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "mfoml/dynamics.h"
#include "mfoml/model.h"

namespace mfoml {

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double primal_residual,
                 double dual_residual, int iterations)
      : std::runtime_error(what),
        primal_residual(primal_residual),
        dual_residual(dual_residual),
        iterations(iterations) {}

  double primal_residual;
  double dual_residual;
  int iterations;
};

class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProjectionSettings {
  double eps_abs = 1e-8;
  double eps_rel = 1e-8;
  int max_inner_iterations = 20000;
  // Penalty on the nonnegativity rows; equality rows use rho * rho_eq_scale.
  double rho = 1.0;
  double rho_eq_scale = 1e3;
  double sigma = 1e-6;
  double relaxation = 1.6;
  // Residual balancing of rho every `adaptive_rho_interval` iterations.
  bool adaptive_rho = true;
  int adaptive_rho_interval = 25;
  bool warm_start = true;
  // After convergence, guess the active set and solve the reduced equality
  // system exactly; the result is kept only if it is at least as accurate.
  bool polish = true;
  double eps_infeasible = 1e-9;
};

struct ProjectionResult {
  Eigen::VectorXd point;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int inner_iterations = 0;
  bool warm_started = false;
  bool polished = false;
};

// Euclidean projection onto a FlowPolytope, written as the QP
//   minimize x'(2I)x/2 - 2 target'x  s.t.  A x = b, x >= 0
// and solved by an operator-splitting (ADMM) iteration over the stacked
// constraint matrix [A; I]. The linear system of each iteration is factorized
// once per polytope and penalty value.
class ProjectionWorkspace {
 public:
  explicit ProjectionWorkspace(FlowPolytope polytope,
                               ProjectionSettings settings = {});
  ~ProjectionWorkspace();
  ProjectionWorkspace(ProjectionWorkspace&&) noexcept;
  ProjectionWorkspace& operator=(ProjectionWorkspace&&) noexcept;

  ProjectionResult project(const Eigen::VectorXd& target);

  // Swaps in a polytope of the same dimensions. The symbolic factorization is
  // reused when the sparsity pattern is unchanged; warm-start state is kept.
  void rebuild(FlowPolytope polytope);

  // Drops the warm-start state so the next solve starts from zero.
  void reset_warm_start();
  void set_warm_start(bool enabled) { settings_.warm_start = enabled; }

  const FlowPolytope& polytope() const { return polytope_; }
  const ProjectionSettings& settings() const { return settings_; }
  double rho() const { return rho_; }
  // Number of symbolic analyses performed so far.
  int symbolic_factorizations() const { return symbolic_count_; }

 private:
  struct Factorization;

  void refactor(bool symbolic);
  bool polish(const Eigen::VectorXd& target, Eigen::VectorXd& x) const;

  FlowPolytope polytope_;
  ProjectionSettings settings_;
  Eigen::SparseMatrix<double> ata_;
  std::unique_ptr<Factorization> factor_;
  double rho_ = 1.0;
  int symbolic_count_ = 0;

  bool has_warm_ = false;
  Eigen::VectorXd x_;
  Eigen::VectorXd z_in_;
  Eigen::VectorXd y_eq_;
  Eigen::VectorXd y_in_;
};

// Residuals of a candidate point: max |A x - b| and max(-x, 0).
double polytope_violation(const FlowPolytope& polytope,
                          const Eigen::VectorXd& x);

}  // namespace mfoml

#endif  // MFOML_PROJECTION_H_
