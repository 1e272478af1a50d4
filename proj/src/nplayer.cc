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

#include "mfoml/nplayer.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <thread>

#include <json.hpp>

#include "mfoml/dynamics.h"

namespace mfoml {
namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

int sample_index(const double* probs, int n, std::mt19937_64& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  int last_positive = 0;
  for (int i = 0; i < n; ++i) {
    if (probs[i] <= 0.0) continue;
    acc += probs[i];
    last_positive = i;
    if (u < acc) return i;
  }
  return last_positive;
}

thread_local int simulation_depth = 0;

}  // namespace

SimulationScope::SimulationScope() { ++simulation_depth; }
SimulationScope::~SimulationScope() { --simulation_depth; }
bool SimulationScope::active() { return simulation_depth > 0; }

uint64_t stream_seed(uint64_t seed, uint64_t k, uint64_t l) {
  return splitmix64(splitmix64(splitmix64(seed) ^ k) ^ l);
}

NPlayerGame::NPlayerGame(MfgModel model, int num_players, uint64_t seed,
                         double reward_noise,
                         std::optional<std::vector<int>> initial_profile)
    : model_(std::move(model)),
      num_players_(num_players),
      seed_(seed),
      reward_noise_(reward_noise) {
  if (num_players < 1) throw InvalidArgument("num_players must be >= 1");
  if (!(reward_noise >= 0.0)) {
    throw InvalidArgument("reward noise must be nonnegative");
  }
  const int S = model_.num_states();
  if (initial_profile.has_value()) {
    if (static_cast<int>(initial_profile->size()) != num_players) {
      throw InvalidArgument("initial profile length differs from N");
    }
    for (int s : *initial_profile) {
      if (s < 0 || s >= S) {
        throw InvalidArgument("initial profile state out of range");
      }
    }
    initial_profile_ = std::move(*initial_profile);
  } else {
    std::mt19937_64 rng(stream_seed(seed, ~0ULL, 0));
    const Eigen::VectorXd& mu0 = model_.mu0();
    initial_profile_.resize(num_players);
    for (int& s : initial_profile_) s = sample_index(mu0.data(), S, rng);
  }
}

Eigen::VectorXd NPlayerGame::initial_distribution() const {
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(model_.num_states());
  for (int s : initial_profile_) mu[s] += 1.0 / num_players_;
  return mu;
}

EpisodeOutcome play_episode(const NPlayerGame& game,
                            std::span<const Policy> policies,
                            std::mt19937_64& rng) {
  SimulationScope scope;
  const MfgModel& model = game.model();
  const Dims& dims = model.dims();
  const int N = game.num_players();
  if (static_cast<int>(policies.size()) != N) {
    throw InvalidArgument("expected " + std::to_string(N) +
                          " policies, got " + std::to_string(policies.size()));
  }
  for (const Policy& p : policies) {
    if (p.dims() != dims) throw InvalidArgument("policy shape mismatch");
  }
  const int S = dims.num_states;
  const int A = dims.num_actions;
  EpisodeOutcome out;
  out.trajectories.assign(N, Trajectory(dims.horizon));
  out.empirical_flow = MeanFieldFlow(dims);

  std::vector<int> states = game.initial_profile();
  std::vector<int> actions(N);
  std::vector<double> reward(dims.state_actions());
  std::vector<double> stage(static_cast<size_t>(dims.state_actions()) * S);
  std::vector<double> pi_row(A);
  const double noise = game.reward_noise();
  std::uniform_real_distribution<double> noise_dist(-1.0, 1.0);

  for (int t = 0; t < dims.horizon; ++t) {
    auto flow_t = out.empirical_flow.slice(t);
    for (int i = 0; i < N; ++i) {
      for (int a = 0; a < A; ++a) pi_row[a] = policies[i](t, states[i], a);
      actions[i] = sample_index(pi_row.data(), A, rng);
      flow_t[dims.slice_index(states[i], actions[i])] += 1.0 / N;
    }
    model.reward_slice(t, flow_t, reward);
    const bool last = t + 1 == dims.horizon;
    if (!last) model.transition_stage(t, flow_t, stage);
    for (int i = 0; i < N; ++i) {
      Step& step = out.trajectories[i][t];
      step.state = states[i];
      step.action = actions[i];
      double r = reward[dims.slice_index(states[i], actions[i])];
      if (noise > 0.0) {
        r = std::clamp(r + noise * noise_dist(rng), -model.r_max(),
                       model.r_max());
      }
      step.reward = r;
      if (!last) {
        const double* row =
            stage.data() + (static_cast<size_t>(states[i]) * A + actions[i]) * S;
        step.next_state = sample_index(row, S, rng);
      }
    }
    if (!last) {
      for (int i = 0; i < N; ++i) states[i] = out.trajectories[i][t].next_state;
    }
  }
  return out;
}

ExplorationBatch sample_explore(const NPlayerGame& game, const Policy& policy,
                                int n_k, int k, int num_threads) {
  if (n_k < 1) throw InvalidArgument("n_k must be >= 1");
  const int N = game.num_players();
  const Policy explore = uniform_policy(game.model().dims());
  ExplorationBatch batch;
  batch.iteration = k;
  batch.episodes.resize(n_k);

  auto run = [&](int l) {
    std::mt19937_64 rng(stream_seed(game.seed(), static_cast<uint64_t>(k),
                                    static_cast<uint64_t>(l)));
    const int explorer = std::uniform_int_distribution<int>(0, N - 1)(rng);
    std::vector<Policy> policies(N, policy);
    policies[explorer] = explore;
    EpisodeOutcome outcome = play_episode(game, policies, rng);
    batch.episodes[l].explorer = explorer;
    batch.episodes[l].steps = std::move(outcome.trajectories[explorer]);
  };

  num_threads = std::clamp(num_threads, 1, n_k);
  if (num_threads == 1) {
    for (int l = 0; l < n_k; ++l) run(l);
    return batch;
  }
  std::vector<std::thread> workers;
  for (int w = 0; w < num_threads; ++w) {
    workers.emplace_back([&, w] {
      for (int l = w; l < n_k; l += num_threads) run(l);
    });
  }
  for (auto& worker : workers) worker.join();
  return batch;
}

void write_batch_jsonl(const ExplorationBatch& batch, std::ostream& out) {
  for (const auto& episode : batch.episodes) {
    nlohmann::json steps = nlohmann::json::array();
    for (const Step& s : episode.steps) {
      steps.push_back({s.state, s.action, s.reward, s.next_state});
    }
    nlohmann::json line{{"iteration", batch.iteration},
                        {"explorer", episode.explorer},
                        {"steps", std::move(steps)}};
    out << line.dump() << "\n";
  }
}

std::vector<ExplorationBatch> read_batches_jsonl(std::istream& in) {
  std::vector<ExplorationBatch> out;
  std::string text;
  int line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.empty()) continue;
    try {
      const auto line = nlohmann::json::parse(text);
      const int k = line.at("iteration").get<int>();
      if (out.empty() || out.back().iteration != k) {
        out.push_back(ExplorationBatch{k, {}});
      }
      EpisodeRecord record;
      record.explorer = line.at("explorer").get<int>();
      for (const auto& s : line.at("steps")) {
        record.steps.push_back(Step{s.at(0).get<int>(), s.at(1).get<int>(),
                                    s.at(2).get<double>(), s.at(3).get<int>()});
      }
      out.back().episodes.push_back(std::move(record));
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument("batch record line " + std::to_string(line_no) +
                            ": " + e.what());
    }
  }
  return out;
}

RewardEstimate estimate_rewards(const ExplorationBatch& batch,
                                const Dims& dims) {
  RewardEstimate out;
  out.dims = dims;
  out.mean = Eigen::VectorXd::Zero(dims.flat_size());
  out.counts = Eigen::VectorXi::Zero(dims.flat_size());
  for (const auto& episode : batch.episodes) {
    if (static_cast<int>(episode.steps.size()) != dims.horizon) {
      throw InvalidArgument("episode length differs from the horizon");
    }
    for (int t = 0; t < dims.horizon; ++t) {
      const Step& s = episode.steps[t];
      const int i = dims.index(t, s.state, s.action);
      out.mean[i] += s.reward;
      out.counts[i] += 1;
    }
  }
  for (int i = 0; i < dims.flat_size(); ++i) {
    if (out.counts[i] > 0) out.mean[i] /= out.counts[i];
  }
  return out;
}

TransitionEstimate estimate_transitions(
    std::span<const ExplorationBatch> batches, const Dims& dims,
    const std::optional<Eigen::VectorXd>& p0) {
  const int S = dims.num_states;
  const int A = dims.num_actions;
  const Eigen::VectorXd fallback =
      p0.value_or(Eigen::VectorXd::Constant(S, 1.0 / S));
  if (fallback.size() != S) throw InvalidArgument("p0 has the wrong length");
  TransitionEstimate out;
  out.p = TransitionTensor(S, A, dims.horizon - 1);
  out.counts.assign(static_cast<size_t>(dims.horizon - 1) * S * A, 0);
  for (const auto& batch : batches) {
    for (const auto& episode : batch.episodes) {
      if (static_cast<int>(episode.steps.size()) != dims.horizon) {
        throw InvalidArgument("episode length differs from the horizon");
      }
      for (int t = 0; t + 1 < dims.horizon; ++t) {
        const Step& s = episode.steps[t];
        out.p(t, s.state, s.action, s.next_state) += 1.0;
        out.counts[(static_cast<size_t>(t) * S + s.state) * A + s.action] += 1;
      }
    }
  }
  for (int t = 0; t + 1 < dims.horizon; ++t) {
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const long n = out.counts[(static_cast<size_t>(t) * S + s) * A + a];
        auto row = out.p.row(t, s, a);
        for (int j = 0; j < S; ++j) {
          row[j] = n > 0 ? row[j] / static_cast<double>(n) : fallback[j];
        }
      }
    }
  }
  return out;
}

EstimatedModel assemble_estimates(const RewardEstimate& rewards,
                                  const TransitionEstimate& transitions,
                                  double r_max) {
  EstimatedModel out;
  out.c_hat = (-rewards.mean).cwiseMax(-r_max).cwiseMin(r_max);
  out.p_hat = transitions.p;
  out.visit_counts = rewards.counts;
  out.cumulative_counts = transitions.counts;
  return out;
}

double exploration_p_min(const MfgModel& model,
                         const std::optional<MeanFieldFlow>& population) {
  const Dims& dims = model.dims();
  const Policy uniform = uniform_policy(dims);
  const MeanFieldFlow anchor =
      population.has_value() ? *population : induced_flow(uniform, model);
  const TransitionTensor p = model.transitions_at(anchor);
  const MeanFieldFlow d = forward_flow(uniform, p, model.mu0());
  const ReachabilitySets reach = reachability(dims, p, model.mu0());
  double p_min = std::numeric_limits<double>::infinity();
  for (int t = 0; t < dims.horizon; ++t) {
    for (int s = 0; s < dims.num_states; ++s) {
      if (reach.is_unreachable(t, s)) continue;
      for (int a = 0; a < dims.num_actions; ++a) {
        p_min = std::min(p_min, d(t, s, a));
      }
    }
  }
  return p_min;
}

EstimationErrorBound error_bounds(const ErrorBoundInputs& in) {
  if (!(in.p_min > 0.0)) throw InvalidArgument("p_min must be positive");
  if (!(in.delta > 0.0 && in.delta < 1.0)) {
    throw InvalidArgument("delta must lie in (0, 1)");
  }
  if (in.n_k < 1 || in.cumulative_n < in.n_k) {
    throw InvalidArgument("invalid sample counts");
  }
  const double S = in.num_states, A = in.num_actions, T = in.horizon;
  const double N = in.num_players;
  const double log4 = std::log(4.0 / in.delta);
  const double nk = static_cast<double>(in.n_k);
  const double total = static_cast<double>(in.cumulative_n);
  EstimationErrorBound out;
  out.delta = in.delta;
  out.p_min = in.p_min;
  out.precondition_met =
      nk > 2.0 * std::log(2.0 / in.delta) / (in.p_min * in.p_min);
  const double mean_field =
      in.c_r * S * A * (1.0 / N + std::sqrt(std::numbers::pi / (2.0 * N)));
  out.epsilon1 =
      std::sqrt(S * A * T) *
          (mean_field +
           2.0 * std::sqrt(in.r_max * in.r_max * log4 / (in.p_min * nk))) +
      in.c_r * S * S * A * T * (T - 1) * std::sqrt(log4 / (in.p_min * total));
  out.epsilon2 = 2.0 * S * std::sqrt(log4 / (in.p_min * total));
  return out;
}

double reward_error_bound(const ErrorBoundInputs& in, double execution_error) {
  const double S = in.num_states, A = in.num_actions;
  const double N = in.num_players;
  const double nk = static_cast<double>(in.n_k);
  const double mean_field =
      in.c_r * S * A * (1.0 / N + std::sqrt(std::numbers::pi / (2.0 * N)));
  const double effective =
      in.p_min * nk - std::sqrt(std::log(2.0 / in.delta) * nk / 2.0);
  if (!(effective > 0.0)) return std::numeric_limits<double>::infinity();
  const double concentration = std::sqrt(
      2.0 * in.r_max * in.r_max * std::log(4.0 / in.delta) / effective);
  return mean_field + concentration + in.c_r * execution_error;
}

}  // namespace mfoml
