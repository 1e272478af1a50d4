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

#include "mfoml/baselines.h"

#include <chrono>
#include <cmath>
#include <limits>
#include <utility>

#include "mfoml/dynamics.h"
#include "mfoml/evaluation.h"

namespace mfoml {
namespace {

using Clock = std::chrono::steady_clock;

// Shared bookkeeping: records, stride, stop rule.
class Recorder {
 public:
  Recorder(const MfgModel& model, const BaselineOptions& options,
           BaselineTrace& trace)
      : model_(model), options_(options), trace_(trace) {
    if (options.iterations < 0) {
      throw InvalidArgument("iterations must be nonnegative");
    }
    if (options.exploitability_stride < 1) {
      throw InvalidArgument("exploitability stride must be >= 1");
    }
  }

  // Returns true when the stop threshold is reached.
  bool record(int k, const Policy& pi, const MeanFieldFlow& flow,
              double elapsed) {
    SolverRecord rec;
    rec.iteration = k;
    rec.elapsed_seconds = elapsed;
    rec.exploitability = std::numeric_limits<double>::quiet_NaN();
    if (k % options_.exploitability_stride == 0 || k == options_.iterations) {
      rec.exploitability = exploitability(model_, pi);
    }
    trace_.records.push_back(rec);
    if (options_.record_iterates) {
      trace_.iterates.push_back(flow);
      trace_.policies.push_back(pi);
    }
    trace_.converged = options_.stop_exploitability.has_value() &&
                       !std::isnan(rec.exploitability) &&
                       rec.exploitability <= *options_.stop_exploitability;
    return trace_.converged;
  }

  bool out_of_time(double elapsed) const {
    return options_.max_seconds.has_value() && elapsed > *options_.max_seconds;
  }

 private:
  const MfgModel& model_;
  const BaselineOptions& options_;
  BaselineTrace& trace_;
};

}  // namespace

BaselineTrace fictitious_play(const MfgModel& model,
                              const BaselineOptions& options) {
  BaselineTrace trace;
  trace.algorithm = "fictitious-play";
  trace.heuristic = !model.has_fixed_transitions();
  Recorder recorder(model, options, trace);

  MeanFieldFlow average = induced_flow(uniform_policy(model.dims()), model);
  Policy pi = normalize(average);
  double elapsed = 0.0;
  bool done = recorder.record(0, pi, average, elapsed);
  for (int k = 0; k < options.iterations && !done; ++k) {
    const auto start = Clock::now();
    const Policy best = solve_induced_mdp(model, average).optimal_policy;
    const MeanFieldFlow induced = induced_flow(best, model);
    const double w = 1.0 / (k + 1);
    average.flat() = (1.0 - w) * average.flat() + w * induced.flat();
    pi = normalize(average);
    elapsed += std::chrono::duration<double>(Clock::now() - start).count();
    done = recorder.record(k + 1, pi, average, elapsed);
    done = done || recorder.out_of_time(elapsed);
  }
  trace.final_flow = std::move(average);
  trace.final_policy = std::move(pi);
  return trace;
}

BaselineTrace online_mirror_descent(const MfgModel& model,
                                    double learning_rate,
                                    const BaselineOptions& options) {
  if (!(learning_rate > 0.0)) {
    throw InvalidArgument("learning rate must be positive");
  }
  const Dims& dims = model.dims();
  BaselineTrace trace;
  trace.algorithm = "omd";
  trace.heuristic = !model.has_fixed_transitions();
  Recorder recorder(model, options, trace);

  Eigen::VectorXd cumulative_q = Eigen::VectorXd::Zero(dims.flat_size());
  Policy pi = uniform_policy(dims);
  MeanFieldFlow flow = induced_flow(pi, model);
  double elapsed = 0.0;
  bool done = recorder.record(0, pi, flow, elapsed);
  for (int k = 0; k < options.iterations && !done; ++k) {
    const auto start = Clock::now();
    cumulative_q += learning_rate * policy_q_values(model, pi, flow);
    for (int t = 0; t < dims.horizon; ++t) {
      for (int s = 0; s < dims.num_states; ++s) {
        double top = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < dims.num_actions; ++a) {
          top = std::max(top, cumulative_q[dims.index(t, s, a)]);
        }
        double total = 0.0;
        for (int a = 0; a < dims.num_actions; ++a) {
          const double e = std::exp(cumulative_q[dims.index(t, s, a)] - top);
          pi(t, s, a) = e;
          total += e;
        }
        for (int a = 0; a < dims.num_actions; ++a) pi(t, s, a) /= total;
      }
    }
    flow = induced_flow(pi, model);
    elapsed += std::chrono::duration<double>(Clock::now() - start).count();
    done = recorder.record(k + 1, pi, flow, elapsed);
    done = done || recorder.out_of_time(elapsed);
  }
  trace.final_flow = std::move(flow);
  trace.final_policy = std::move(pi);
  return trace;
}

}  // namespace mfoml
