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

#include "mfoml/solver.h"

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <utility>

#include "mfoml/dynamics.h"
#include "mfoml/evaluation.h"

namespace mfoml {

void SolverSchedule::check() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InvalidArgument("step size alpha must be positive");
  }
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw InvalidArgument("perturbation eta must be nonnegative");
  }
  if (max_iterations < 0) {
    throw InvalidArgument("max_iterations must be nonnegative");
  }
  if (stop_exploitability.has_value() && !(*stop_exploitability >= 0.0)) {
    throw InvalidArgument("stop_exploitability must be nonnegative");
  }
}

SolverSchedule derive_schedule(double c_r, int num_states, int num_actions,
                               int horizon, double lambda,
                               std::optional<double> epsilon) {
  Dims{num_states, num_actions, horizon}.check();
  if (!(c_r > 0.0)) throw InvalidArgument("C_R must be positive");
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be nonnegative");
  const double sa = static_cast<double>(num_states) * num_actions;
  const double scale = c_r * c_r * sa * sa;
  SolverSchedule schedule;
  if (lambda > 0.0) {
    schedule.alpha = lambda / (2.0 * scale);
    schedule.eta = 0.0;
    schedule.kappa = lambda * lambda / (2.0 * scale);
    return schedule;
  }
  if (!epsilon.has_value() || !(*epsilon > 0.0)) {
    throw InvalidArgument(
        "lambda = 0 requires a positive target accuracy epsilon");
  }
  const double eps = *epsilon;
  const double T = horizon;
  schedule.alpha = eps / (8.0 * scale * T + eps * eps / (2.0 * T));
  schedule.eta = eps / (4.0 * T);
  return schedule;
}

Eigen::VectorXd cost_vector(const MfgModel& model, const MeanFieldFlow& flow) {
  const Dims& dims = model.dims();
  if (flow.dims() != dims) {
    throw InvalidArgument("flow shape does not match the model");
  }
  Eigen::VectorXd out(dims.flat_size());
  for (int t = 0; t < dims.horizon; ++t) {
    model.reward_slice(t, flow.slice(t),
                       std::span<double>(out.data() + t * dims.state_actions(),
                                         dims.state_actions()));
  }
  return -out;
}

long SolverTrace::total_inner_iterations() const {
  long total = 0;
  for (const auto& r : records) total += r.inner_iterations;
  return total;
}

std::optional<int> SolverTrace::first_below(double threshold) const {
  for (const auto& r : records) {
    if (!std::isnan(r.exploitability) && r.exploitability <= threshold) {
      return r.iteration;
    }
  }
  return std::nullopt;
}

double SolverTrace::final_exploitability() const {
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    if (!std::isnan(it->exploitability)) return it->exploitability;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

namespace {

using Clock = std::chrono::steady_clock;

// Cost at d^k, and a hook that refreshes the polytope before projecting.
struct LoopHooks {
  std::function<Eigen::VectorXd(int k, const MeanFieldFlow& d,
                                const Policy& pi)>
      cost;
  // Returns a polytope to project onto at iteration k, or nullopt to keep the
  // current one.
  std::function<std::optional<FlowPolytope>(int k, const MeanFieldFlow& d,
                                            const Eigen::VectorXd& step)>
      polytope;
  PolicyEvaluator evaluate;
};

SolverTrace run_loop(MeanFieldFlow d,
                     const SolverSchedule& schedule,
                     const SolverOptions& options,
                     std::optional<FlowPolytope> initial_polytope,
                     const LoopHooks& hooks) {
  schedule.check();
  if (options.exploitability_stride < 1) {
    throw InvalidArgument("exploitability stride must be >= 1");
  }
  SolverTrace trace;
  std::optional<ProjectionWorkspace> workspace;
  if (initial_polytope.has_value()) {
    workspace.emplace(std::move(*initial_polytope), options.projection);
  }

  double elapsed = 0.0;
  Policy pi = normalize(d);
  auto record = [&](int k, int inner) {
    SolverRecord rec;
    rec.iteration = k;
    rec.elapsed_seconds = elapsed;
    rec.inner_iterations = inner;
    rec.exploitability = std::numeric_limits<double>::quiet_NaN();
    const bool last = k == schedule.max_iterations;
    if (hooks.evaluate && (k % options.exploitability_stride == 0 || last)) {
      rec.exploitability = hooks.evaluate(pi);
    }
    trace.records.push_back(rec);
    if (options.record_iterates) {
      trace.iterates.push_back(d);
      trace.policies.push_back(pi);
    }
    return rec.exploitability;
  };
  auto reached = [&](double expl) {
    return schedule.stop_exploitability.has_value() && !std::isnan(expl) &&
           expl <= *schedule.stop_exploitability;
  };

  double expl = record(0, 0);
  trace.converged = reached(expl);
  for (int k = 0; k < schedule.max_iterations && !trace.converged; ++k) {
    const auto start = Clock::now();
    const Eigen::VectorXd c = hooks.cost(k, d, pi);
    const Eigen::VectorXd step =
        d.flat() - schedule.alpha * (c + schedule.eta * d.flat());
    std::optional<FlowPolytope> fresh = hooks.polytope(k, d, step);
    if (fresh.has_value()) {
      if (workspace.has_value()) {
        workspace->rebuild(std::move(*fresh));
      } else {
        workspace.emplace(std::move(*fresh), options.projection);
      }
    }
    if (!workspace.has_value()) {
      throw SolverError("no polytope available at iteration " +
                            std::to_string(k),
                        k);
    }
    ProjectionResult proj;
    try {
      proj = workspace->project(step);
    } catch (const NonConvergence& e) {
      std::ostringstream os;
      os << "outer iteration " << k << ": " << e.what();
      throw SolverError(os.str(), k);
    } catch (const Infeasible& e) {
      std::ostringstream os;
      os << "outer iteration " << k << ": " << e.what();
      throw SolverError(os.str(), k);
    }
    d.flat() = std::move(proj.point);
    pi = normalize(d);
    elapsed += std::chrono::duration<double>(Clock::now() - start).count();
    expl = record(k + 1, proj.inner_iterations);
    trace.converged = reached(expl);
    if (schedule.max_seconds.has_value() && elapsed > *schedule.max_seconds) {
      break;
    }
  }
  trace.final_flow = std::move(d);
  trace.final_policy = std::move(pi);
  return trace;
}

}  // namespace

SolverTrace solve_mfomi_fbs(const MfgModel& model,
                            const SolverSchedule& schedule,
                            const Policy& initial_policy,
                            const SolverOptions& options) {
  if (initial_policy.dims() != model.dims()) {
    throw InvalidArgument("initial policy shape does not match the model");
  }
  MeanFieldFlow d0 = induced_flow(initial_policy, model);
  LoopHooks hooks;
  hooks.cost = [&model](int, const MeanFieldFlow& d, const Policy&) {
    return cost_vector(model, d);
  };
  hooks.evaluate = [&model](const Policy& pi) {
    return exploitability(model, pi);
  };
  std::optional<FlowPolytope> initial;
  if (model.has_fixed_transitions()) {
    initial = assemble_polytope(model);
    hooks.polytope = [](int, const MeanFieldFlow&, const Eigen::VectorXd&) {
      return std::optional<FlowPolytope>();
    };
  } else {
    const Dims dims = model.dims();
    const AnchorMode anchor = options.anchor;
    hooks.polytope = [&model, dims, anchor](int, const MeanFieldFlow& d,
                                            const Eigen::VectorXd& step) {
      const MeanFieldFlow at =
          anchor == AnchorMode::kCurrentIterate ? d : MeanFieldFlow(dims, step);
      return std::optional<FlowPolytope>(assemble_polytope_at(model, at));
    };
  }
  SolverTrace trace = run_loop(std::move(d0), schedule, options,
                               std::move(initial), hooks);
  trace.heuristic = !model.has_fixed_transitions();
  return trace;
}

namespace {

void check_estimate(const ApproxProblem& problem, const OracleEstimate& est,
                    int k) {
  const Dims& dims = problem.dims;
  if (est.cost.size() != dims.flat_size()) {
    throw InvalidArgument("oracle cost has the wrong length at iteration " +
                          std::to_string(k));
  }
  if (est.cost.size() > 0 &&
      est.cost.lpNorm<Eigen::Infinity>() > problem.r_max * (1.0 + 1e-12)) {
    throw InvalidArgument("oracle cost exceeds r_max at iteration " +
                          std::to_string(k));
  }
  const TransitionTensor& p = est.transitions;
  if (p.num_states() != dims.num_states ||
      p.num_actions() != dims.num_actions || p.stages() != dims.horizon - 1) {
    throw InvalidArgument("oracle transitions have the wrong shape");
  }
  for (int t = 0; t < p.stages(); ++t) {
    for (int s = 0; s < dims.num_states; ++s) {
      for (int a = 0; a < dims.num_actions; ++a) {
        double total = 0.0;
        for (double v : p.row(t, s, a)) {
          if (v < 0.0) {
            throw InvalidArgument("oracle transition row is not stochastic");
          }
          total += v;
        }
        if (std::abs(total - 1.0) > 1e-12) {
          throw InvalidArgument("oracle transition row is not stochastic");
        }
      }
    }
  }
}

}  // namespace

SolverTrace solve_mfomi_fbs_approx(const ApproxProblem& problem,
                                   const ApproximationOracle& oracle,
                                   const SolverSchedule& schedule,
                                   const MeanFieldFlow& initial_flow,
                                   const SolverOptions& options,
                                   const PolicyEvaluator& evaluator) {
  problem.dims.check();
  if (initial_flow.dims() != problem.dims) {
    throw InvalidArgument("initial flow shape does not match the problem");
  }
  if (!oracle) throw InvalidArgument("approximation oracle is empty");
  auto current = std::make_shared<TransitionTensor>();
  LoopHooks hooks;
  hooks.cost = [&problem, &oracle, current](int k, const MeanFieldFlow& d,
                                            const Policy& pi) {
    OracleEstimate est = oracle(k, d, pi);
    check_estimate(problem, est, k);
    *current = std::move(est.transitions);
    return est.cost;
  };
  hooks.polytope = [&problem, current](int, const MeanFieldFlow&,
                                       const Eigen::VectorXd&) {
    return std::optional<FlowPolytope>(assemble_polytope(
        problem.dims, *current, problem.mu0, /*dense_blocks=*/true));
  };
  hooks.evaluate = evaluator;
  return run_loop(initial_flow, schedule, options, std::nullopt,
                  hooks);
}

}  // namespace mfoml
