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

#include "mfoml/model.h"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace mfoml {
namespace {

constexpr double kSimplexTol = 1e-12;

std::string at(int t, int s, int a) {
  std::ostringstream os;
  os << "t=" << t << " s=" << s << " a=" << a;
  return os.str();
}

}  // namespace

void Dims::check() const {
  if (num_states < 1 || num_actions < 1 || horizon < 1) {
    std::ostringstream os;
    os << "dimensions must be positive, got S=" << num_states
       << " A=" << num_actions << " T=" << horizon;
    throw InvalidArgument(os.str());
  }
}

MeanFieldFlow::MeanFieldFlow(Dims dims)
    : dims_(dims), values_(Eigen::VectorXd::Zero(dims.flat_size())) {
  dims_.check();
}

MeanFieldFlow::MeanFieldFlow(Dims dims, Eigen::VectorXd values)
    : dims_(dims), values_(std::move(values)) {
  dims_.check();
  if (values_.size() != dims_.flat_size()) {
    throw InvalidArgument("flow vector has length " +
                          std::to_string(values_.size()) + ", expected " +
                          std::to_string(dims_.flat_size()));
  }
}

MeanFieldFlow MeanFieldFlow::Uniform(Dims dims) {
  dims.check();
  return MeanFieldFlow(dims, Eigen::VectorXd::Constant(
                                 dims.flat_size(), 1.0 / dims.state_actions()));
}

double MeanFieldFlow::state_mass(int t, int s) const {
  double total = 0.0;
  for (int a = 0; a < dims_.num_actions; ++a) total += (*this)(t, s, a);
  return total;
}

double MeanFieldFlow::max_mass_error() const {
  double worst = 0.0;
  for (int t = 0; t < dims_.horizon; ++t) {
    double total = 0.0;
    for (double v : slice(t)) total += v;
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return worst;
}

Policy::Policy(Dims dims, Eigen::VectorXd values)
    : dims_(dims), values_(std::move(values)) {
  dims_.check();
  if (values_.size() != dims_.flat_size()) {
    throw InvalidArgument("policy vector has length " +
                          std::to_string(values_.size()) + ", expected " +
                          std::to_string(dims_.flat_size()));
  }
}

double Policy::max_simplex_error() const {
  double worst = 0.0;
  for (int t = 0; t < dims_.horizon; ++t) {
    for (int s = 0; s < dims_.num_states; ++s) {
      double total = 0.0;
      for (int a = 0; a < dims_.num_actions; ++a) {
        const double p = (*this)(t, s, a);
        if (p < 0.0 || !std::isfinite(p)) {
          return std::numeric_limits<double>::infinity();
        }
        total += p;
      }
      worst = std::max(worst, std::abs(total - 1.0));
    }
  }
  return worst;
}

Policy uniform_policy(const Dims& dims) {
  dims.check();
  return Policy(dims, Eigen::VectorXd::Constant(dims.flat_size(),
                                                1.0 / dims.num_actions));
}

Policy uniform_policy(int num_states, int num_actions, int horizon) {
  return uniform_policy(Dims{num_states, num_actions, horizon});
}

TransitionTensor::TransitionTensor(int num_states, int num_actions, int stages)
    : num_states_(num_states), num_actions_(num_actions), stages_(stages) {
  if (num_states < 1 || num_actions < 1 || stages < 0) {
    throw InvalidArgument("invalid transition tensor shape");
  }
  data_.assign(static_cast<size_t>(stages) * stage_size(), 0.0);
}

double TransitionTensor::max_row_l1_distance(
    const TransitionTensor& other) const {
  if (other.num_states_ != num_states_ || other.num_actions_ != num_actions_ ||
      other.stages_ != stages_) {
    throw InvalidArgument("transition tensors differ in shape");
  }
  double worst = 0.0;
  for (size_t row = 0; row < data_.size(); row += num_states_) {
    double dist = 0.0;
    for (int j = 0; j < num_states_; ++j) {
      dist += std::abs(data_[row + j] - other.data_[row + j]);
    }
    worst = std::max(worst, dist);
  }
  return worst;
}

MfgModel::MfgModel(Dims dims, Eigen::VectorXd mu0, RewardFn reward,
                   TransitionTensor transitions, Constants constants)
    : dims_(dims),
      mu0_(std::move(mu0)),
      reward_(std::move(reward)),
      fixed_(std::move(transitions)),
      constants_(constants) {
  dims_.check();
  if (mu0_.size() != dims_.num_states) {
    throw InvalidArgument("mu0 has length " + std::to_string(mu0_.size()) +
                          ", expected " + std::to_string(dims_.num_states));
  }
  if (fixed_.num_states() != dims_.num_states ||
      fixed_.num_actions() != dims_.num_actions ||
      fixed_.stages() != dims_.horizon - 1) {
    throw InvalidArgument("transition tensor shape does not match the model");
  }
  if (!reward_) throw InvalidArgument("reward function is empty");
  if (!(constants_.r_max > 0.0)) throw InvalidArgument("r_max must be > 0");
}

MfgModel::MfgModel(Dims dims, Eigen::VectorXd mu0, RewardFn reward,
                   TransitionFn transitions, Constants constants)
    : dims_(dims),
      mu0_(std::move(mu0)),
      reward_(std::move(reward)),
      transition_fn_(std::move(transitions)),
      constants_(constants) {
  dims_.check();
  if (mu0_.size() != dims_.num_states) {
    throw InvalidArgument("mu0 has length " + std::to_string(mu0_.size()) +
                          ", expected " + std::to_string(dims_.num_states));
  }
  if (!reward_) throw InvalidArgument("reward function is empty");
  if (!transition_fn_) throw InvalidArgument("transition function is empty");
  if (!(constants_.r_max > 0.0)) throw InvalidArgument("r_max must be > 0");
}

const TransitionTensor& MfgModel::fixed_transitions() const {
  if (transition_fn_) {
    throw InvalidArgument(
        "model has mean-field-dependent transitions; anchor them at a flow");
  }
  return fixed_;
}

void MfgModel::transition_stage(int t, std::span<const double> flow_t,
                                std::span<double> out) const {
  if (transition_fn_) {
    transition_fn_(t, flow_t, out);
  } else {
    auto stage = fixed_.stage(t);
    std::copy(stage.begin(), stage.end(), out.begin());
  }
}

TransitionTensor MfgModel::transitions_at(const MeanFieldFlow& anchor) const {
  if (!transition_fn_) return fixed_;
  if (anchor.dims() != dims_) {
    throw InvalidArgument("anchor flow shape does not match the model");
  }
  TransitionTensor out(dims_.num_states, dims_.num_actions, dims_.horizon - 1);
  for (int t = 0; t + 1 < dims_.horizon; ++t) {
    transition_fn_(t, anchor.slice(t), out.stage(t));
  }
  return out;
}

void MfgModel::reward_slice(int t, std::span<const double> flow_t,
                            std::span<double> out) const {
  reward_(t, flow_t, out);
}

double MfgModel::reward(int t, int s, int a,
                        std::span<const double> flow_t) const {
  std::vector<double> out(dims_.state_actions());
  reward_(t, flow_t, out);
  return out[dims_.slice_index(s, a)];
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& issue : issues) {
    os << issue.what;
    if (!issue.location.empty()) os << " [" << issue.location << "]";
    os << ": " << issue.message << "\n";
  }
  return os.str();
}

namespace {

void check_rows(const Dims& dims, const TransitionTensor& p,
                ValidationReport& report) {
  for (int t = 0; t < p.stages(); ++t) {
    for (int s = 0; s < dims.num_states; ++s) {
      for (int a = 0; a < dims.num_actions; ++a) {
        double total = 0.0;
        bool negative = false;
        for (double v : p.row(t, s, a)) {
          negative |= v < 0.0 || !std::isfinite(v);
          total += v;
        }
        if (negative) {
          report.issues.push_back(
              {"transition", at(t, s, a), "row has a negative entry"});
        } else if (std::abs(total - 1.0) > kSimplexTol) {
          std::ostringstream os;
          os << "row sums to " << total;
          report.issues.push_back({"transition", at(t, s, a), os.str()});
        }
      }
    }
  }
}

void check_rewards(const MfgModel& model, const MeanFieldFlow& flow,
                   ValidationReport& report) {
  const Dims& dims = model.dims();
  std::vector<double> out(dims.state_actions());
  for (int t = 0; t < dims.horizon; ++t) {
    model.reward_slice(t, flow.slice(t), out);
    for (int s = 0; s < dims.num_states; ++s) {
      for (int a = 0; a < dims.num_actions; ++a) {
        const double r = out[dims.slice_index(s, a)];
        if (!std::isfinite(r) || std::abs(r) > model.r_max() * (1 + 1e-12)) {
          std::ostringstream os;
          os << "|reward| = " << std::abs(r) << " exceeds r_max "
             << model.r_max();
          report.issues.push_back({"reward", at(t, s, a), os.str()});
        }
      }
    }
  }
}

}  // namespace

ValidationReport validate_model(const MfgModel& model,
                                std::span<const MeanFieldFlow> probe_flows) {
  ValidationReport report;
  const Dims& dims = model.dims();
  double total = 0.0;
  for (int s = 0; s < dims.num_states; ++s) {
    const double v = model.mu0()[s];
    if (v < 0.0 || !std::isfinite(v)) {
      report.issues.push_back(
          {"mu0", "s=" + std::to_string(s), "negative entry"});
    }
    total += v;
  }
  if (std::abs(total - 1.0) > kSimplexTol) {
    std::ostringstream os;
    os << "mu0 sums to " << total << ", expected 1";
    report.issues.push_back({"mu0", "", os.str()});
  }

  const MeanFieldFlow uniform = MeanFieldFlow::Uniform(dims);
  if (model.has_fixed_transitions()) {
    check_rows(dims, model.fixed_transitions(), report);
  } else {
    check_rows(dims, model.transitions_at(uniform), report);
    for (const auto& flow : probe_flows) {
      check_rows(dims, model.transitions_at(flow), report);
    }
  }
  check_rewards(model, uniform, report);
  for (const auto& flow : probe_flows) check_rewards(model, flow, report);
  return report;
}

void StrategyProfileSummary::check(int num_players) const {
  if (deviating_agent.has_value()) {
    if (*deviating_agent < 0 || *deviating_agent >= num_players) {
      throw InvalidArgument("deviating agent index out of range");
    }
    if (!deviation_policy.has_value()) {
      throw InvalidArgument("deviating agent given without a policy");
    }
  }
}

}  // namespace mfoml
