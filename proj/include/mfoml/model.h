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

#ifndef MFOML_MODEL_H_
#define MFOML_MODEL_H_

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mfoml {

// Thrown for malformed inputs: wrong shapes, invalid parameters, bad files.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Dims {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;

  int state_actions() const { return num_states * num_actions; }
  // Length of a flattened flow / cost vector.
  int flat_size() const { return num_states * num_actions * horizon; }

  // Column-major over (s, a) within a time slice, slices concatenated over t.
  int index(int t, int s, int a) const {
    return t * state_actions() + a * num_states + s;
  }
  int slice_index(int s, int a) const { return a * num_states + s; }

  void check() const;
  friend bool operator==(const Dims&, const Dims&) = default;
};

// Nonnegative T x S x A tensor stored flat in the order of Dims::index.
// Used both for a mean-field flow L and for an occupation measure d.
class MeanFieldFlow {
 public:
  MeanFieldFlow() = default;
  explicit MeanFieldFlow(Dims dims);
  MeanFieldFlow(Dims dims, Eigen::VectorXd values);

  static MeanFieldFlow Uniform(Dims dims);

  const Dims& dims() const { return dims_; }
  const Eigen::VectorXd& flat() const { return values_; }
  Eigen::VectorXd& flat() { return values_; }

  double operator()(int t, int s, int a) const {
    return values_[dims_.index(t, s, a)];
  }
  double& operator()(int t, int s, int a) {
    return values_[dims_.index(t, s, a)];
  }

  std::span<const double> slice(int t) const {
    return {values_.data() + t * dims_.state_actions(),
            static_cast<size_t>(dims_.state_actions())};
  }
  std::span<double> slice(int t) {
    return {values_.data() + t * dims_.state_actions(),
            static_cast<size_t>(dims_.state_actions())};
  }

  // Marginal over actions: mu_t(s) = sum_a L_t(s, a).
  double state_mass(int t, int s) const;

  // Largest |sum_{s,a} L_t(s,a) - 1| over t.
  double max_mass_error() const;

 private:
  Dims dims_;
  Eigen::VectorXd values_;
};

// Time-indexed per-state action distributions, same flat layout as flows.
class Policy {
 public:
  Policy() = default;
  Policy(Dims dims, Eigen::VectorXd values);

  const Dims& dims() const { return dims_; }
  const Eigen::VectorXd& flat() const { return values_; }
  Eigen::VectorXd& flat() { return values_; }

  double operator()(int t, int s, int a) const {
    return values_[dims_.index(t, s, a)];
  }
  double& operator()(int t, int s, int a) {
    return values_[dims_.index(t, s, a)];
  }

  // Largest |sum_a pi_t(a|s) - 1|, or +inf if any entry is negative.
  double max_simplex_error() const;

 private:
  Dims dims_;
  Eigen::VectorXd values_;
};

Policy uniform_policy(int num_states, int num_actions, int horizon);
Policy uniform_policy(const Dims& dims);

// P_t(s' | s, a) for t in [0, stages). Rows are contiguous.
class TransitionTensor {
 public:
  TransitionTensor() = default;
  TransitionTensor(int num_states, int num_actions, int stages);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  int stages() const { return stages_; }

  size_t offset(int t, int s, int a) const {
    return ((static_cast<size_t>(t) * num_states_ + s) * num_actions_ + a) *
           num_states_;
  }
  std::span<const double> row(int t, int s, int a) const {
    return {data_.data() + offset(t, s, a), static_cast<size_t>(num_states_)};
  }
  std::span<double> row(int t, int s, int a) {
    return {data_.data() + offset(t, s, a), static_cast<size_t>(num_states_)};
  }
  double operator()(int t, int s, int a, int next) const {
    return data_[offset(t, s, a) + next];
  }
  double& operator()(int t, int s, int a, int next) {
    return data_[offset(t, s, a) + next];
  }

  // The S*A*S block of one stage, laid out (s, a, s').
  std::span<const double> stage(int t) const {
    return {data_.data() + offset(t, 0, 0), stage_size()};
  }
  std::span<double> stage(int t) {
    return {data_.data() + offset(t, 0, 0), stage_size()};
  }
  size_t stage_size() const {
    return static_cast<size_t>(num_states_) * num_actions_ * num_states_;
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  // max over (t, s, a) of sum_s' |P_t - Q_t|.
  double max_row_l1_distance(const TransitionTensor& other) const;

  friend bool operator==(const TransitionTensor&,
                         const TransitionTensor&) = default;

 private:
  int num_states_ = 0;
  int num_actions_ = 0;
  int stages_ = 0;
  std::vector<double> data_;
};

// Writes R_t(., ., L_t) for one time step into `out` (length S*A, column-major
// over (s, a)). `flow_t` is the time-t slice of the flow. Must be reentrant.
using RewardFn = std::function<void(int t, std::span<const double> flow_t,
                                    std::span<double> out)>;

// Writes P_t(. | ., ., L_t) for one stage into `out` (layout (s, a, s')).
using TransitionFn = std::function<void(int t, std::span<const double> flow_t,
                                        std::span<double> out)>;

// A finite-horizon tabular mean-field game. Transitions have T-1 stages:
// P_t is used to move from time t to t+1 for t in [0, T-2].
class MfgModel {
 public:
  struct Constants {
    double r_max = 1.0;
    std::optional<double> lipschitz_c_r;
    std::optional<double> monotone_lambda;
  };

  MfgModel(Dims dims, Eigen::VectorXd mu0, RewardFn reward,
           TransitionTensor transitions, Constants constants);
  MfgModel(Dims dims, Eigen::VectorXd mu0, RewardFn reward,
           TransitionFn transitions, Constants constants);

  const Dims& dims() const { return dims_; }
  int num_states() const { return dims_.num_states; }
  int num_actions() const { return dims_.num_actions; }
  int horizon() const { return dims_.horizon; }
  const Eigen::VectorXd& mu0() const { return mu0_; }
  double r_max() const { return constants_.r_max; }
  const Constants& constants() const { return constants_; }

  bool has_fixed_transitions() const { return !transition_fn_; }
  // Throws InvalidArgument for mean-field-dependent models.
  const TransitionTensor& fixed_transitions() const;

  // Transitions with every stage anchored at the matching slice of `anchor`.
  // For fixed models the anchor is ignored.
  TransitionTensor transitions_at(const MeanFieldFlow& anchor) const;
  // One stage anchored at a single time slice; writes layout (s, a, s').
  void transition_stage(int t, std::span<const double> flow_t,
                        std::span<double> out) const;

  void reward_slice(int t, std::span<const double> flow_t,
                    std::span<double> out) const;
  double reward(int t, int s, int a, std::span<const double> flow_t) const;

  const RewardFn& reward_fn() const { return reward_; }
  const TransitionFn& transition_fn() const { return transition_fn_; }

 private:
  Dims dims_;
  Eigen::VectorXd mu0_;
  RewardFn reward_;
  TransitionTensor fixed_;
  TransitionFn transition_fn_;
  Constants constants_;
};

struct ValidationIssue {
  std::string what;      // e.g. "mu0", "transition", "reward", "dims"
  std::string location;  // e.g. "t=0 s=1 a=0"
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string to_string() const;
};

// Checks simplex invariants of mu0 and of every transition row (fixed
// transitions, or those anchored at the uniform flow plus `probe_flows`), and
// the reward bound on the uniform flow and `probe_flows`.
ValidationReport validate_model(
    const MfgModel& model, std::span<const MeanFieldFlow> probe_flows = {});

// All agents play `base_policy`, except optionally one deviating agent.
struct StrategyProfileSummary {
  Policy base_policy;
  std::optional<int> deviating_agent;
  std::optional<Policy> deviation_policy;

  void check(int num_players) const;
};

}  // namespace mfoml

#endif  // MFOML_MODEL_H_
