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

#include "mfoml/envs.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <random>
#include <set>
#include <sstream>

namespace mfoml {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Linear specs

double LinearRewardSpec::implied_r_max() const {
  double base_max = 0.0;
  for (double v : base) base_max = std::max(base_max, std::abs(v));
  const int sa = dims.state_actions();
  double row_max = 0.0;
  for (size_t row = 0; row + sa <= interaction.size(); row += sa) {
    double total = 0.0;
    for (int j = 0; j < sa; ++j) total += std::abs(interaction[row + j]);
    row_max = std::max(row_max, total);
  }
  return base_max + row_max;
}

double LinearRewardSpec::max_abs_interaction() const {
  double out = 0.0;
  for (double v : interaction) out = std::max(out, std::abs(v));
  return out;
}

void LinearRewardSpec::check() const {
  dims.check();
  const size_t sa = dims.state_actions();
  if (base.size() != static_cast<size_t>(dims.flat_size())) {
    throw InvalidArgument("linear reward base has the wrong length");
  }
  if (interaction.size() != dims.horizon * sa * sa) {
    throw InvalidArgument("linear reward interaction has the wrong length");
  }
  for (double v : base) {
    if (!std::isfinite(v)) throw InvalidArgument("non-finite reward base");
  }
  for (double v : interaction) {
    if (!std::isfinite(v)) throw InvalidArgument("non-finite interaction");
  }
}

void LinearRewardSpec::evaluate(int t, std::span<const double> flow_t,
                                std::span<double> out) const {
  const int sa = dims.state_actions();
  const double* w = interaction.data() + static_cast<size_t>(t) * sa * sa;
  for (int i = 0; i < sa; ++i) {
    double r = base[static_cast<size_t>(t) * sa + i];
    const double* row = w + static_cast<size_t>(i) * sa;
    for (int j = 0; j < sa; ++j) r += row[j] * flow_t[j];
    out[i] = r;
  }
}

bool SoftmaxTransitionSpec::is_uncoupled() const {
  return std::all_of(coupling.begin(), coupling.end(),
                     [](double v) { return v == 0.0; });
}

void SoftmaxTransitionSpec::check() const {
  dims.check();
  const size_t rows = static_cast<size_t>(dims.horizon - 1) *
                      dims.state_actions() * dims.num_states;
  if (logits.size() != rows) {
    throw InvalidArgument("softmax transition logits have the wrong length");
  }
  if (coupling.size() != rows * dims.state_actions()) {
    throw InvalidArgument("softmax transition coupling has the wrong length");
  }
}

void SoftmaxTransitionSpec::evaluate(int t, std::span<const double> flow_t,
                                     std::span<double> out) const {
  const int S = dims.num_states;
  const int sa = dims.state_actions();
  const size_t stage = static_cast<size_t>(t) * sa * S;
  for (int row = 0; row < sa; ++row) {
    double* p = out.data() + static_cast<size_t>(row) * S;
    double top = -std::numeric_limits<double>::infinity();
    for (int n = 0; n < S; ++n) {
      const size_t k = stage + static_cast<size_t>(row) * S + n;
      double z = logits[k];
      const double* v = coupling.data() + k * sa;
      for (int j = 0; j < sa; ++j) z += v[j] * flow_t[j];
      p[n] = z;
      top = std::max(top, z);
    }
    double total = 0.0;
    for (int n = 0; n < S; ++n) {
      p[n] = std::exp(p[n] - top);
      total += p[n];
    }
    for (int n = 0; n < S; ++n) p[n] /= total;
  }
}

MfgModel LinearGameSpec::to_model() const {
  reward.check();
  if (reward.dims != dims) throw InvalidArgument("reward dims mismatch");
  auto shared_reward = std::make_shared<LinearRewardSpec>(reward);
  RewardFn reward_fn = [shared_reward](int t, std::span<const double> flow_t,
                                       std::span<double> out) {
    shared_reward->evaluate(t, flow_t, out);
  };
  MfgModel::Constants constants;
  constants.r_max = std::max(reward.implied_r_max(), 1e-300);
  constants.lipschitz_c_r = reward.max_abs_interaction();
  if (const auto* fixed = std::get_if<TransitionTensor>(&transitions)) {
    return MfgModel(dims, mu0, std::move(reward_fn), *fixed, constants);
  }
  const auto& soft = std::get<SoftmaxTransitionSpec>(transitions);
  soft.check();
  if (soft.dims != dims) throw InvalidArgument("transition dims mismatch");
  if (soft.is_uncoupled()) {
    TransitionTensor p(dims.num_states, dims.num_actions, dims.horizon - 1);
    std::vector<double> zeros(dims.state_actions(), 0.0);
    for (int t = 0; t + 1 < dims.horizon; ++t) {
      soft.evaluate(t, zeros, p.stage(t));
    }
    return MfgModel(dims, mu0, std::move(reward_fn), std::move(p), constants);
  }
  auto shared_soft = std::make_shared<SoftmaxTransitionSpec>(soft);
  TransitionFn transition_fn = [shared_soft](int t,
                                             std::span<const double> flow_t,
                                             std::span<double> out) {
    shared_soft->evaluate(t, flow_t, out);
  };
  return MfgModel(dims, mu0, std::move(reward_fn), std::move(transition_fn),
                  constants);
}

// ---------------------------------------------------------------------------
// SIS

namespace {

void require_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw InvalidArgument(std::string("parameter '") + name +
                          "' must lie in [0, 1]");
  }
}

void require_nonnegative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw InvalidArgument(std::string("parameter '") + name +
                          "' must be nonnegative");
  }
}

void require_positive(int v, const char* name) {
  if (v < 1) {
    throw InvalidArgument(std::string("parameter '") + name +
                          "' must be a positive integer");
  }
}

}  // namespace

MfgModel make_sis(const SisParams& params) {
  require_unit(params.infection_rate, "infection_rate");
  require_unit(params.recovery_rate, "recovery_rate");
  require_unit(params.initial_infected, "initial_infected");
  require_nonnegative(params.distancing_cost, "distancing_cost");
  require_nonnegative(params.infection_cost, "infection_cost");
  require_positive(params.horizon, "horizon");
  constexpr int kS = 0, kI = 1, kGoOut = 0, kDistance = 1;
  const Dims dims{2, 2, params.horizon};
  Eigen::VectorXd mu0(2);
  mu0 << 1.0 - params.initial_infected, params.initial_infected;

  const SisParams p = params;
  RewardFn reward = [p, dims](int, std::span<const double>,
                              std::span<double> out) {
    for (int s = 0; s < 2; ++s) {
      for (int a = 0; a < 2; ++a) {
        out[dims.slice_index(s, a)] =
            -(a == kDistance ? p.distancing_cost : 0.0) -
            (s == kI ? p.infection_cost : 0.0);
      }
    }
  };
  TransitionFn transitions = [p, dims](int, std::span<const double> flow_t,
                                       std::span<double> out) {
    const double infected = flow_t[dims.slice_index(kI, kGoOut)] +
                            flow_t[dims.slice_index(kI, kDistance)];
    const double q = std::clamp(p.infection_rate * infected, 0.0, 1.0);
    auto row = [&](int s, int a) { return out.data() + (s * 2 + a) * 2; };
    row(kS, kGoOut)[kS] = 1.0 - q;
    row(kS, kGoOut)[kI] = q;
    row(kS, kDistance)[kS] = 1.0;
    row(kS, kDistance)[kI] = 0.0;
    for (int a = 0; a < 2; ++a) {
      row(kI, a)[kS] = p.recovery_rate;
      row(kI, a)[kI] = 1.0 - p.recovery_rate;
    }
  };
  MfgModel::Constants constants;
  constants.r_max =
      std::max(params.distancing_cost + params.infection_cost, 1e-12);
  constants.lipschitz_c_r = 0.0;
  constants.monotone_lambda = 0.0;
  return MfgModel(dims, mu0, std::move(reward), std::move(transitions),
                  constants);
}

// ---------------------------------------------------------------------------
// Building evacuation

TransitionTensor evacuation_transitions(const EvacuationParams& params) {
  require_positive(params.floors, "floors");
  require_positive(params.length, "length");
  require_positive(params.width, "width");
  require_positive(params.horizon, "horizon");
  const int S = params.floors * params.length * params.width;
  TransitionTensor p(S, kNumEvacuationActions, params.horizon - 1);
  auto is_stair = [&](int r, int c) {
    return (r == 0 && c == 0) ||
           (r == params.length - 1 && c == params.width - 1);
  };
  for (int f = 0; f < params.floors; ++f) {
    for (int r = 0; r < params.length; ++r) {
      for (int c = 0; c < params.width; ++c) {
        const int s = evacuation_state(params, f, r, c);
        for (int a = 0; a < kNumEvacuationActions; ++a) {
          int nf = f, nr = r, nc = c;
          switch (a) {
            case kUp: nr = r - 1; break;
            case kDown: nr = r + 1; break;
            case kLeft: nc = c - 1; break;
            case kRight: nc = c + 1; break;
            case kStay: break;
            case kDescend:
              if (f > 0 && is_stair(r, c)) nf = f - 1;
              break;
          }
          if (nr < 0 || nr >= params.length || nc < 0 || nc >= params.width) {
            nr = r;
            nc = c;
          }
          const int next = evacuation_state(params, nf, nr, nc);
          for (int t = 0; t < p.stages(); ++t) p(t, s, a, next) = 1.0;
        }
      }
    }
  }
  return p;
}

MfgModel make_building_evacuation(const EvacuationParams& params) {
  TransitionTensor p = evacuation_transitions(params);
  require_nonnegative(params.floor_cost, "floor_cost");
  require_nonnegative(params.crowd_cost, "crowd_cost");
  const int S = p.num_states();
  const Dims dims{S, kNumEvacuationActions, params.horizon};
  Eigen::VectorXd mu0 = Eigen::VectorXd::Zero(S);
  if (params.initial_cell.has_value()) {
    const auto [f, r, c] = *params.initial_cell;
    if (f < 0 || f >= params.floors || r < 0 || r >= params.length || c < 0 ||
        c >= params.width) {
      throw InvalidArgument("parameter 'initial_cell' lies outside the grid");
    }
    mu0[evacuation_state(params, f, r, c)] = 1.0;
  } else {
    const int cells = params.length * params.width;
    for (int i = 0; i < cells; ++i) {
      mu0[(params.floors - 1) * cells + i] = 1.0 / cells;
    }
  }
  const EvacuationParams ep = params;
  const int cells = params.length * params.width;
  RewardFn reward = [ep, dims, cells](int, std::span<const double> flow_t,
                                      std::span<double> out) {
    for (int s = 0; s < dims.num_states; ++s) {
      const double height = static_cast<double>(s / cells) / ep.floors;
      for (int a = 0; a < dims.num_actions; ++a) {
        const int i = dims.slice_index(s, a);
        out[i] = -ep.floor_cost * height - ep.crowd_cost * flow_t[i];
      }
    }
  };
  MfgModel::Constants constants;
  constants.r_max = std::max(
      params.floor_cost * (params.floors - 1) / params.floors +
          params.crowd_cost,
      1e-12);
  constants.lipschitz_c_r = params.crowd_cost;
  constants.monotone_lambda = params.crowd_cost;
  return MfgModel(dims, mu0, std::move(reward), std::move(p), constants);
}

// ---------------------------------------------------------------------------
// Random linear

LinearGameSpec random_linear_spec(const RandomLinearParams& params) {
  require_positive(params.num_states, "num_states");
  require_positive(params.num_actions, "num_actions");
  require_positive(params.horizon, "horizon");
  if (!std::isfinite(params.coupling_scale)) {
    throw InvalidArgument("parameter 'coupling_scale' must be finite");
  }
  const Dims dims{params.num_states, params.num_actions, params.horizon};
  const int S = dims.num_states;
  const size_t sa = dims.state_actions();
  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = 1.0 / static_cast<double>(sa);

  LinearGameSpec spec;
  spec.dims = dims;
  spec.mu0 = Eigen::VectorXd::Constant(S, 1.0 / S);
  spec.reward.dims = dims;
  spec.reward.base.resize(dims.flat_size());
  for (double& v : spec.reward.base) v = normal(rng) * scale;
  spec.reward.interaction.resize(dims.horizon * sa * sa);
  for (double& v : spec.reward.interaction) v = normal(rng) * scale;

  SoftmaxTransitionSpec soft;
  soft.dims = dims;
  const size_t rows = static_cast<size_t>(dims.horizon - 1) * sa * S;
  soft.logits.resize(rows);
  for (double& v : soft.logits) v = normal(rng);
  soft.coupling.resize(rows * sa);
  for (double& v : soft.coupling) v = normal(rng) * params.coupling_scale;
  spec.transitions = std::move(soft);
  return spec;
}

MfgModel make_random_linear(const RandomLinearParams& params) {
  return random_linear_spec(params).to_model();
}

// ---------------------------------------------------------------------------
// Config files

namespace {

std::string field_error(const std::string& source, const std::string& field,
                        const std::string& message) {
  return source + ": field '" + field + "': " + message;
}

// Typed access to params with defaults and diagnostics naming the field.
class ParamReader {
 public:
  ParamReader(const json& params, std::string source)
      : params_(params), source_(std::move(source)) {
    if (!params_.is_object()) {
      throw ParseError(field_error(source_, "params", "expected an object"));
    }
  }

  int get_int(const std::string& key, int fallback) {
    seen_.insert(key);
    if (!params_.contains(key)) return fallback;
    const json& v = params_.at(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<int>();
  }
  int get_positive_int(const std::string& key, int fallback) {
    const int v = get_int(key, fallback);
    if (v < 1) fail(key, "must be a positive integer, got " + std::to_string(v));
    return v;
  }
  double get_double(const std::string& key, double fallback) {
    seen_.insert(key);
    if (!params_.contains(key)) return fallback;
    const json& v = params_.at(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }
  std::vector<double> get_array(const std::string& key, size_t length) {
    seen_.insert(key);
    if (!params_.contains(key)) fail(key, "missing");
    const json& v = params_.at(key);
    if (!v.is_array()) fail(key, "expected an array");
    if (v.size() != length) {
      fail(key, "expected " + std::to_string(length) + " entries, got " +
                    std::to_string(v.size()));
    }
    std::vector<double> out;
    out.reserve(length);
    for (const auto& e : v) {
      if (!e.is_number()) fail(key, "expected numeric entries");
      out.push_back(e.get<double>());
    }
    return out;
  }
  bool has(const std::string& key) const { return params_.contains(key); }
  const json& raw(const std::string& key) {
    seen_.insert(key);
    return params_.at(key);
  }
  void reject_unknown() const {
    for (const auto& [key, value] : params_.items()) {
      if (!seen_.count(key)) fail(key, "unknown parameter");
    }
  }
  [[noreturn]] void fail(const std::string& key,
                         const std::string& message) const {
    throw ParseError(field_error(source_, "params." + key, message));
  }

 private:
  const json& params_;
  std::string source_;
  std::set<std::string> seen_;
};

SisParams read_sis(ParamReader& r) {
  SisParams p;
  p.infection_rate = r.get_double("infection_rate", p.infection_rate);
  p.recovery_rate = r.get_double("recovery_rate", p.recovery_rate);
  p.distancing_cost = r.get_double("distancing_cost", p.distancing_cost);
  p.infection_cost = r.get_double("infection_cost", p.infection_cost);
  p.horizon = r.get_positive_int("horizon", p.horizon);
  p.initial_infected = r.get_double("initial_infected", p.initial_infected);
  r.reject_unknown();
  for (auto [key, value] :
       {std::pair{"infection_rate", p.infection_rate},
        {"recovery_rate", p.recovery_rate},
        {"initial_infected", p.initial_infected}}) {
    if (!(value >= 0.0 && value <= 1.0)) r.fail(key, "must lie in [0, 1]");
  }
  if (!(p.distancing_cost >= 0.0)) r.fail("distancing_cost", "must be >= 0");
  if (!(p.infection_cost >= 0.0)) r.fail("infection_cost", "must be >= 0");
  return p;
}

EvacuationParams read_evacuation(ParamReader& r) {
  EvacuationParams p;
  p.floors = r.get_positive_int("floors", p.floors);
  p.length = r.get_positive_int("length", p.length);
  p.width = r.get_positive_int("width", p.width);
  p.horizon = r.get_positive_int("horizon", p.horizon);
  p.floor_cost = r.get_double("floor_cost", p.floor_cost);
  p.crowd_cost = r.get_double("crowd_cost", p.crowd_cost);
  if (r.has("initial_cell")) {
    const json& cell = r.raw("initial_cell");
    if (!cell.is_null()) {
      if (!cell.is_array() || cell.size() != 3 ||
          !std::all_of(cell.begin(), cell.end(),
                       [](const json& e) { return e.is_number_integer(); })) {
        r.fail("initial_cell", "expected [floor, row, col] integers");
      }
      p.initial_cell = std::array<int, 3>{cell[0].get<int>(),
                                          cell[1].get<int>(),
                                          cell[2].get<int>()};
      const auto [f, row, col] = *p.initial_cell;
      if (f < 0 || f >= p.floors || row < 0 || row >= p.length || col < 0 ||
          col >= p.width) {
        r.fail("initial_cell", "lies outside the grid");
      }
    }
  }
  r.reject_unknown();
  if (!(p.floor_cost >= 0.0)) r.fail("floor_cost", "must be >= 0");
  if (!(p.crowd_cost >= 0.0)) r.fail("crowd_cost", "must be >= 0");
  return p;
}

RandomLinearParams read_random_linear(ParamReader& r, uint64_t seed) {
  RandomLinearParams p;
  p.num_states = r.get_positive_int("num_states", p.num_states);
  p.num_actions = r.get_positive_int("num_actions", p.num_actions);
  p.horizon = r.get_positive_int("horizon", p.horizon);
  p.coupling_scale = r.get_double("coupling_scale", p.coupling_scale);
  p.seed = seed;
  r.reject_unknown();
  return p;
}

json sis_json(const SisParams& p) {
  return json{{"infection_rate", p.infection_rate},
              {"recovery_rate", p.recovery_rate},
              {"distancing_cost", p.distancing_cost},
              {"infection_cost", p.infection_cost},
              {"horizon", p.horizon},
              {"initial_infected", p.initial_infected}};
}

json evacuation_json(const EvacuationParams& p) {
  json out{{"floors", p.floors},         {"length", p.length},
           {"width", p.width},           {"horizon", p.horizon},
           {"floor_cost", p.floor_cost}, {"crowd_cost", p.crowd_cost}};
  if (p.initial_cell.has_value()) {
    out["initial_cell"] = json::array(
        {(*p.initial_cell)[0], (*p.initial_cell)[1], (*p.initial_cell)[2]});
  }
  return out;
}

json random_linear_json(const RandomLinearParams& p) {
  return json{{"num_states", p.num_states},
              {"num_actions", p.num_actions},
              {"horizon", p.horizon},
              {"coupling_scale", p.coupling_scale}};
}

// Parses an override value: JSON literal when possible, else a bare string.
json override_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return json(text);
  }
}

}  // namespace

const std::vector<std::string>& known_environments() {
  static const std::vector<std::string> names = {
      "sis", "building-evacuation", "random-linear", "linear"};
  return names;
}

EnvConfig default_config(const std::string& environment,
                         const std::map<std::string, std::string>& overrides) {
  EnvConfig config;
  config.environment = environment;
  if (environment == "sis") {
    config.params = sis_json(SisParams{});
  } else if (environment == "building-evacuation") {
    config.params = evacuation_json(EvacuationParams{});
  } else if (environment == "random-linear") {
    config.params = random_linear_json(RandomLinearParams{});
  } else {
    throw ParseError("unknown environment '" + environment + "'");
  }
  for (const auto& [key, value] : overrides) {
    if (key == "seed") {
      try {
        size_t used = 0;
        config.seed = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParseError("parameter 'seed': expected a nonnegative integer");
      }
      continue;
    }
    if (key == "reward_noise") {
      const json v = override_value(value);
      if (!v.is_number() || v.get<double>() < 0.0) {
        throw ParseError("parameter 'reward_noise': expected a number >= 0");
      }
      config.reward_noise = v.get<double>();
      continue;
    }
    if (!config.params.contains(key) &&
        !(environment == "building-evacuation" && key == "initial_cell")) {
      throw ParseError("unknown parameter '" + key + "' for environment '" +
                       environment + "'");
    }
    config.params[key] = override_value(value);
  }
  // Round-trip through the validator so bad values fail here.
  (void)build_env(config);
  return config;
}

EnvConfig parse_env_config(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    size_t line = 1, col = 1;
    for (size_t i = 0; i < std::min<size_t>(e.byte, text.size() + 1) &&
                       i < text.size();
         ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream os;
    os << source << ":" << line << ":" << col << ": syntax error: " << e.what();
    throw ParseError(os.str());
  }
  if (!doc.is_object()) {
    throw ParseError(source + ": top level must be an object");
  }
  EnvConfig config;
  auto require = [&](const char* key) -> const json& {
    if (!doc.contains(key)) {
      throw ParseError(field_error(source, key, "missing"));
    }
    return doc.at(key);
  };
  const json& version = require("format_version");
  if (!version.is_number_integer() ||
      version.get<int>() != EnvConfig::kFormatVersion) {
    throw ParseError(field_error(source, "format_version",
                                 "unsupported version (expected " +
                                     std::to_string(EnvConfig::kFormatVersion) +
                                     ")"));
  }
  const json& name = require("environment");
  if (!name.is_string()) {
    throw ParseError(field_error(source, "environment", "expected a string"));
  }
  config.environment = name.get<std::string>();
  const auto& names = known_environments();
  if (std::find(names.begin(), names.end(), config.environment) ==
      names.end()) {
    throw ParseError(field_error(source, "environment",
                                 "unknown environment '" +
                                     config.environment + "'"));
  }
  if (doc.contains("params")) config.params = doc.at("params");
  if (doc.contains("seed")) {
    const json& seed = doc.at("seed");
    if (!seed.is_number_unsigned()) {
      throw ParseError(
          field_error(source, "seed", "expected a nonnegative integer"));
    }
    config.seed = seed.get<uint64_t>();
  }
  if (doc.contains("reward_noise")) {
    const json& noise = doc.at("reward_noise");
    if (!noise.is_number() || noise.get<double>() < 0.0) {
      throw ParseError(
          field_error(source, "reward_noise", "expected a number >= 0"));
    }
    config.reward_noise = noise.get<double>();
  }
  for (const auto& [key, value] : doc.items()) {
    static const std::set<std::string> allowed = {
        "format_version", "environment", "params", "seed", "reward_noise"};
    if (!allowed.count(key)) {
      throw ParseError(field_error(source, key, "unknown field"));
    }
  }
  // Validate parameters eagerly so errors point at the file.
  try {
    (void)build_env(config);
  } catch (const ParseError& e) {
    throw ParseError(source + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(source + ": " + e.what());
  }
  return config;
}

EnvConfig load_env_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_env_config(buffer.str(), path);
}

std::string dump_env_config(const EnvConfig& config) {
  json doc{{"format_version", config.format_version},
           {"environment", config.environment},
           {"params", config.params},
           {"seed", config.seed},
           {"reward_noise", config.reward_noise}};
  return doc.dump(2) + "\n";
}

void save_env_config(const EnvConfig& config, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw InvalidArgument("cannot write '" + path + "'");
    out << dump_env_config(config);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw InvalidArgument("cannot move '" + tmp + "' to '" + path + "'");
  }
}

EnvConfig linear_config(const LinearGameSpec& spec, double reward_noise) {
  EnvConfig config;
  config.environment = "linear";
  config.reward_noise = reward_noise;
  json params{{"num_states", spec.dims.num_states},
              {"num_actions", spec.dims.num_actions},
              {"horizon", spec.dims.horizon},
              {"mu0", std::vector<double>(spec.mu0.data(),
                                          spec.mu0.data() + spec.mu0.size())},
              {"reward_base", spec.reward.base},
              {"reward_interaction", spec.reward.interaction}};
  if (const auto* fixed = std::get_if<TransitionTensor>(&spec.transitions)) {
    params["transitions"] = fixed->data();
  } else {
    const auto& soft = std::get<SoftmaxTransitionSpec>(spec.transitions);
    params["transition_logits"] = soft.logits;
    params["transition_coupling"] = soft.coupling;
  }
  config.params = std::move(params);
  return config;
}

LinearGameSpec linear_spec_from_config(const EnvConfig& config) {
  if (config.environment != "linear") {
    throw ParseError("environment '" + config.environment +
                     "' is not a tabulated linear game");
  }
  ParamReader r(config.params, "linear");
  LinearGameSpec spec;
  spec.dims.num_states = r.get_positive_int("num_states", 0);
  spec.dims.num_actions = r.get_positive_int("num_actions", 0);
  spec.dims.horizon = r.get_positive_int("horizon", 0);
  const Dims& d = spec.dims;
  const size_t sa = d.state_actions();
  const std::vector<double> mu0 = r.get_array("mu0", d.num_states);
  spec.mu0 = Eigen::Map<const Eigen::VectorXd>(mu0.data(), d.num_states);
  spec.reward.dims = d;
  spec.reward.base = r.get_array("reward_base", d.flat_size());
  spec.reward.interaction =
      r.get_array("reward_interaction", d.horizon * sa * sa);
  const size_t rows = static_cast<size_t>(d.horizon - 1) * sa * d.num_states;
  if (r.has("transitions")) {
    TransitionTensor p(d.num_states, d.num_actions, d.horizon - 1);
    p.data() = r.get_array("transitions", rows);
    spec.transitions = std::move(p);
  } else if (r.has("transition_logits")) {
    SoftmaxTransitionSpec soft;
    soft.dims = d;
    soft.logits = r.get_array("transition_logits", rows);
    soft.coupling = r.get_array("transition_coupling", rows * sa);
    spec.transitions = std::move(soft);
  } else {
    r.fail("transitions", "missing (or transition_logits)");
  }
  r.reject_unknown();
  return spec;
}

MfgModel build_env(const EnvConfig& config) {
  if (config.format_version != EnvConfig::kFormatVersion) {
    throw ParseError("unsupported format_version " +
                     std::to_string(config.format_version));
  }
  if (config.environment == "sis") {
    ParamReader r(config.params, "sis");
    return make_sis(read_sis(r));
  }
  if (config.environment == "building-evacuation") {
    ParamReader r(config.params, "building-evacuation");
    return make_building_evacuation(read_evacuation(r));
  }
  if (config.environment == "random-linear") {
    ParamReader r(config.params, "random-linear");
    return make_random_linear(read_random_linear(r, config.seed));
  }
  if (config.environment == "linear") {
    MfgModel model = linear_spec_from_config(config).to_model();
    const ValidationReport report = validate_model(model);
    if (!report.ok()) throw ParseError("invalid model: " + report.to_string());
    return model;
  }
  throw ParseError("unknown environment '" + config.environment + "'");
}

MfgModel load_env(const std::string& path) {
  return build_env(load_env_config(path));
}

}  // namespace mfoml
