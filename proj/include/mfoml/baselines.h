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

#ifndef MFOML_BASELINES_H_
#define MFOML_BASELINES_H_

#include <optional>

#include "mfoml/model.h"
#include "mfoml/solver.h"

namespace mfoml {

// Baseline runs reuse the solver's trace type; `algorithm` names the method.
using BaselineTrace = SolverTrace;

struct BaselineOptions {
  int iterations = 1000;
  std::optional<double> stop_exploitability;
  // Stops once cumulative solver time exceeds this many seconds.
  std::optional<double> max_seconds;
  int exploitability_stride = 1;
  bool record_iterates = false;
};

// Best response to the averaged flow, then 1/(k+1) averaging of the induced
// flows. The reported policy at k is normalize(averaged flow).
BaselineTrace fictitious_play(const MfgModel& model,
                              const BaselineOptions& options = {});

// Cumulative Q accumulation with a softmax policy:
//   Q += learning_rate * Q^{pi}(L^{pi}),  pi_t(.|s) = softmax(Q_t(s, .)).
BaselineTrace online_mirror_descent(const MfgModel& model,
                                    double learning_rate = 1.0,
                                    const BaselineOptions& options = {});

}  // namespace mfoml

#endif  // MFOML_BASELINES_H_
