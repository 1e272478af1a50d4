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

#include "mfoml/projection.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

#include <Eigen/SparseCholesky>

namespace mfoml {
namespace {

double inf_norm(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
}

bool same_pattern(const Eigen::SparseMatrix<double>& a,
                  const Eigen::SparseMatrix<double>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() ||
      a.nonZeros() != b.nonZeros()) {
    return false;
  }
  return std::equal(a.outerIndexPtr(), a.outerIndexPtr() + a.outerSize() + 1,
                    b.outerIndexPtr()) &&
         std::equal(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros(),
                    b.innerIndexPtr());
}

}  // namespace

struct ProjectionWorkspace::Factorization {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  Eigen::SparseMatrix<double> kkt;
};

double polytope_violation(const FlowPolytope& polytope,
                          const Eigen::VectorXd& x) {
  const double eq = inf_norm(polytope.a_matrix * x - polytope.b_vector);
  const double neg = x.size() == 0 ? 0.0 : std::max(0.0, -x.minCoeff());
  return std::max(eq, neg);
}

ProjectionWorkspace::ProjectionWorkspace(FlowPolytope polytope,
                                         ProjectionSettings settings)
    : polytope_(std::move(polytope)),
      settings_(settings),
      factor_(std::make_unique<Factorization>()),
      rho_(settings.rho) {
  if (!(settings_.rho > 0.0) || !(settings_.sigma > 0.0) ||
      settings_.max_inner_iterations < 1 || !(settings_.relaxation > 0.0) ||
      !(settings_.relaxation < 2.0)) {
    throw InvalidArgument("invalid projection settings");
  }
  ata_ = polytope_.a_matrix.transpose() * polytope_.a_matrix;
  refactor(/*symbolic=*/true);
}

ProjectionWorkspace::~ProjectionWorkspace() = default;
ProjectionWorkspace::ProjectionWorkspace(ProjectionWorkspace&&) noexcept =
    default;
ProjectionWorkspace& ProjectionWorkspace::operator=(
    ProjectionWorkspace&&) noexcept = default;

void ProjectionWorkspace::refactor(bool symbolic) {
  const int n = polytope_.num_cols();
  Eigen::SparseMatrix<double> kkt = ata_ * (rho_ * settings_.rho_eq_scale);
  Eigen::SparseMatrix<double> diag(n, n);
  diag.setIdentity();
  kkt += diag * (2.0 + settings_.sigma + rho_);
  kkt.makeCompressed();
  if (symbolic || !same_pattern(kkt, factor_->kkt)) {
    factor_->ldlt.analyzePattern(kkt);
    ++symbolic_count_;
  }
  factor_->ldlt.factorize(kkt);
  if (factor_->ldlt.info() != Eigen::Success) {
    throw NonConvergence("projection system factorization failed", 0, 0, 0);
  }
  factor_->kkt = std::move(kkt);
}

void ProjectionWorkspace::rebuild(FlowPolytope polytope) {
  if (polytope.a_matrix.rows() != polytope_.a_matrix.rows() ||
      polytope.a_matrix.cols() != polytope_.a_matrix.cols() ||
      polytope.dims != polytope_.dims) {
    throw InvalidArgument("rebuild with a polytope of different dimensions");
  }
  polytope_ = std::move(polytope);
  // Not pruned: explicit zeros keep the pattern stable across anchors.
  ata_ = polytope_.a_matrix.transpose() * polytope_.a_matrix;
  refactor(/*symbolic=*/false);
}

void ProjectionWorkspace::reset_warm_start() { has_warm_ = false; }

ProjectionResult ProjectionWorkspace::project(const Eigen::VectorXd& target) {
  const Eigen::SparseMatrix<double>& A = polytope_.a_matrix;
  const Eigen::VectorXd& b = polytope_.b_vector;
  const int n = polytope_.num_cols();
  const int m = polytope_.num_rows();
  if (target.size() != n) {
    throw InvalidArgument("projection target has length " +
                          std::to_string(target.size()) + ", expected " +
                          std::to_string(n));
  }
  const double sigma = settings_.sigma;
  const double alpha = settings_.relaxation;

  ProjectionResult result;
  result.warm_started = settings_.warm_start && has_warm_;
  if (!result.warm_started) {
    x_ = Eigen::VectorXd::Zero(n);
    z_in_ = Eigen::VectorXd::Zero(n);
    y_eq_ = Eigen::VectorXd::Zero(m);
    y_in_ = Eigen::VectorXd::Zero(n);
  }
  const Eigen::VectorXd q = -2.0 * target;
  const double q_norm = inf_norm(q);

  Eigen::VectorXd rhs(n), x_tilde(n), ax(m), ze_hat(m), zi_hat(n);
  Eigen::VectorXd y_eq_prev(m), y_in_prev(n);
  double r_prim = 0.0, r_dual = 0.0;
  bool converged = false;
  int iter = 0;
  while (iter < settings_.max_inner_iterations) {
    ++iter;
    const double rho_eq = rho_ * settings_.rho_eq_scale;
    y_eq_prev = y_eq_;
    y_in_prev = y_in_;

    // z_eq is pinned to b after every update.
    rhs = sigma * x_ - q + A.transpose() * (rho_eq * b - y_eq_) +
          (rho_ * z_in_ - y_in_);
    x_tilde = factor_->ldlt.solve(rhs);
    ax = A * x_tilde;

    x_ = alpha * x_tilde + (1.0 - alpha) * x_;
    ze_hat = alpha * ax + (1.0 - alpha) * b;
    y_eq_ += rho_eq * (ze_hat - b);
    zi_hat = alpha * x_tilde + (1.0 - alpha) * z_in_;
    const Eigen::VectorXd z_new =
        (zi_hat + y_in_ / rho_).cwiseMax(0.0);
    y_in_ += rho_ * (zi_hat - z_new);
    z_in_ = z_new;

    const Eigen::VectorXd axk = A * x_;
    r_prim = std::max(inf_norm(axk - b), inf_norm(x_ - z_in_));
    const Eigen::VectorXd aty = A.transpose() * y_eq_ + y_in_;
    r_dual = inf_norm(2.0 * x_ + q + aty);
    const double prim_scale =
        std::max({inf_norm(axk), inf_norm(x_), inf_norm(b), inf_norm(z_in_)});
    const double dual_scale =
        std::max({2.0 * inf_norm(x_), inf_norm(aty), q_norm});
    const double eps_prim = settings_.eps_abs + settings_.eps_rel * prim_scale;
    const double eps_dual = settings_.eps_abs + settings_.eps_rel * dual_scale;
    if (r_prim <= eps_prim && r_dual <= eps_dual) {
      converged = true;
      break;
    }

    if (iter % settings_.adaptive_rho_interval == 0) {
      // Primal infeasibility certificate on the change of the dual iterate.
      const Eigen::VectorXd dy_eq = y_eq_ - y_eq_prev;
      const Eigen::VectorXd dy_in = y_in_ - y_in_prev;
      const double dy_norm = std::max(inf_norm(dy_eq), inf_norm(dy_in));
      if (dy_norm > 1e-30) {
        const double tol = settings_.eps_infeasible * dy_norm;
        const double cert = inf_norm(A.transpose() * dy_eq + dy_in);
        const bool upper_ok = dy_in.size() == 0 || dy_in.maxCoeff() <= tol;
        if (cert <= tol && upper_ok && b.dot(dy_eq) < -tol) {
          throw Infeasible("flow polytope is infeasible");
        }
      }
      if (settings_.adaptive_rho) {
        const double prim_rel = r_prim / std::max(prim_scale, 1e-30);
        const double dual_rel = r_dual / std::max(dual_scale, 1e-30);
        double rho_new = rho_ * std::sqrt(prim_rel / std::max(dual_rel, 1e-30));
        rho_new = std::clamp(rho_new, 1e-6, 1e6);
        if (rho_new > 5.0 * rho_ || rho_new < 0.2 * rho_) {
          rho_ = rho_new;
          refactor(/*symbolic=*/false);
        }
      }
    }
  }
  has_warm_ = true;
  result.inner_iterations = iter;
  result.primal_residual = r_prim;
  result.dual_residual = r_dual;
  if (!converged) {
    std::ostringstream os;
    os << "projection did not converge in " << iter
       << " inner iterations (primal residual " << r_prim
       << ", dual residual " << r_dual << ")";
    throw NonConvergence(os.str(), r_prim, r_dual, iter);
  }

  result.point = x_.cwiseMax(0.0);
  if (settings_.polish) {
    Eigen::VectorXd polished;
    if (polish(target, polished)) {
      result.point = std::move(polished);
      result.polished = true;
      result.primal_residual = polytope_violation(polytope_, result.point);
    }
  }
  return result;
}

bool ProjectionWorkspace::polish(const Eigen::VectorXd& target,
                                 Eigen::VectorXd& x) const {
  const Eigen::SparseMatrix<double>& A = polytope_.a_matrix;
  const Eigen::VectorXd& b = polytope_.b_vector;
  const int n = polytope_.num_cols();
  const int m = polytope_.num_rows();

  // Lower bound active where the nonnegativity multiplier dominates.
  std::vector<int> free_cols;
  std::vector<char> active(n, 0);
  for (int i = 0; i < n; ++i) {
    if (z_in_[i] < -y_in_[i]) {
      active[i] = 1;
    } else {
      free_cols.push_back(i);
    }
  }
  Eigen::SparseMatrix<double> a_free(m, static_cast<int>(free_cols.size()));
  {
    std::vector<Eigen::Triplet<double>> entries;
    for (int j = 0; j < static_cast<int>(free_cols.size()); ++j) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(A, free_cols[j]); it;
           ++it) {
        entries.emplace_back(static_cast<int>(it.row()), j, it.value());
      }
    }
    a_free.setFromTriplets(entries.begin(), entries.end());
  }
  Eigen::VectorXd t_free(free_cols.size());
  for (size_t j = 0; j < free_cols.size(); ++j) t_free[j] = target[free_cols[j]];

  // (A_F A_F') mu = A_F t_F - b, regularized and refined since A_F may lose
  // rank when whole blocks are inactive.
  Eigen::SparseMatrix<double> gram = a_free * a_free.transpose();
  const double delta = 1e-10;
  Eigen::SparseMatrix<double> reg = gram;
  Eigen::SparseMatrix<double> eye(m, m);
  eye.setIdentity();
  reg += eye * delta;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(reg);
  if (solver.info() != Eigen::Success) return false;
  const Eigen::VectorXd rhs = a_free * t_free - b;
  Eigen::VectorXd mu = solver.solve(rhs);
  for (int k = 0; k < 5; ++k) mu += solver.solve(rhs - gram * mu);

  Eigen::VectorXd candidate = Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd atmu = A.transpose() * mu;
  for (size_t j = 0; j < free_cols.size(); ++j) {
    const int i = free_cols[j];
    candidate[i] = target[i] - atmu[i];
  }
  const double tol = std::max(settings_.eps_abs, 1e-10);
  if (candidate.minCoeff() < -tol) return false;
  if (inf_norm(A * candidate - b) > tol) return false;
  for (int i = 0; i < n; ++i) {
    // Multiplier of an active bound must be nonnegative.
    if (active[i] && 2.0 * (atmu[i] - target[i]) < -tol) return false;
  }
  x = candidate.cwiseMax(0.0);
  return true;
}

}  // namespace mfoml
