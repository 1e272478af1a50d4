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

#ifndef MFOML_ENVS_H_
#define MFOML_ENVS_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mfoml/model.h"

namespace mfoml {

class ParseError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// R_t(s,a,L) = base[t,s,a] + sum_{s',a'} interaction[t,s,a,s',a'] L_t(s',a').
// `base` uses the flow layout; `interaction` is indexed
// (t * SA + slice_index(s,a)) * SA + slice_index(s',a').
struct LinearRewardSpec {
  Dims dims;
  std::vector<double> base;
  std::vector<double> interaction;

  // max |base| + max row-l1 of the interaction.
  double implied_r_max() const;
  // max |interaction| entry: a Lipschitz constant w.r.t. the l1 norm of L_t.
  double max_abs_interaction() const;
  void evaluate(int t, std::span<const double> flow_t,
                std::span<double> out) const;
  void check() const;
};

// P_t(.|s,a,L) = softmax over s' of logits[t,s,a,s'] +
// sum_j coupling[t,s,a,s',j] L_t[j], for t < T-1. `logits` follows the
// TransitionTensor layout; `coupling` appends the S*A flow index innermost.
struct SoftmaxTransitionSpec {
  Dims dims;
  std::vector<double> logits;
  std::vector<double> coupling;

  bool is_uncoupled() const;
  void evaluate(int t, std::span<const double> flow_t,
                std::span<double> out) const;
  void check() const;
};

// A fully tabulated linear-in-mean-field game; serializes losslessly.
struct LinearGameSpec {
  Dims dims;
  Eigen::VectorXd mu0;
  LinearRewardSpec reward;
  std::variant<TransitionTensor, SoftmaxTransitionSpec> transitions;

  MfgModel to_model() const;
};

struct SisParams {
  double infection_rate = 0.81;
  double recovery_rate = 0.3;
  double distancing_cost = 0.5;
  double infection_cost = 1.0;
  int horizon = 50;
  double initial_infected = 0.6;
};

// States {Susceptible, Infected}, actions {GoOut, Distance}.
MfgModel make_sis(const SisParams& params = {});

struct EvacuationParams {
  int floors = 3;
  int length = 5;
  int width = 5;
  int horizon = 5;
  double floor_cost = 1.0;
  double crowd_cost = 1.0;
  // (floor, row, col). When absent, mass starts uniform over the top floor.
  std::optional<std::array<int, 3>> initial_cell;
};

enum EvacuationAction { kUp = 0, kDown, kLeft, kRight, kStay, kDescend };
constexpr int kNumEvacuationActions = 6;

inline int evacuation_state(const EvacuationParams& p, int floor, int row,
                            int col) {
  return (floor * p.length + row) * p.width + col;
}

// Deterministic grid moves; staircases at (0,0) and (length-1,width-1) on
// every floor, where `descend` moves one floor down to the same cell.
MfgModel make_building_evacuation(const EvacuationParams& params = {});
TransitionTensor evacuation_transitions(const EvacuationParams& params);

struct RandomLinearParams {
  int num_states = 10;
  int num_actions = 10;
  int horizon = 10;
  uint64_t seed = 0;
  // Multiplies the mean-field coupling of the transition logits; 0 yields
  // mean-field-independent transitions.
  double coupling_scale = 1.0;
};

LinearGameSpec random_linear_spec(const RandomLinearParams& params);
MfgModel make_random_linear(const RandomLinearParams& params);

// On-disk environment description, JSON with a format_version field.
struct EnvConfig {
  static constexpr int kFormatVersion = 1;
  int format_version = kFormatVersion;
  // "sis", "building-evacuation", "random-linear", or "linear".
  std::string environment;
  nlohmann::json params = nlohmann::json::object();
  uint64_t seed = 0;
  // Amplitude of additive uniform noise on sampled rewards.
  double reward_noise = 0.0;
};

const std::vector<std::string>& known_environments();

// Defaults for a named environment with `overrides` (name=value strings)
// applied. Unknown names or parameters raise ParseError.
EnvConfig default_config(const std::string& environment,
                         const std::map<std::string, std::string>& overrides =
                             {});

EnvConfig parse_env_config(const std::string& text,
                           const std::string& source = "<string>");
EnvConfig load_env_config(const std::string& path);
std::string dump_env_config(const EnvConfig& config);
void save_env_config(const EnvConfig& config, const std::string& path);

EnvConfig linear_config(const LinearGameSpec& spec, double reward_noise = 0.0);
LinearGameSpec linear_spec_from_config(const EnvConfig& config);

MfgModel build_env(const EnvConfig& config);
MfgModel load_env(const std::string& path);

}  // namespace mfoml

#endif  // MFOML_ENVS_H_
