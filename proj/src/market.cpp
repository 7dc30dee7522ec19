// Copyright 2026 The Oligo Authors
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

#include "oligo/market.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "oligo/rng.hpp"

namespace oligo {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfigInvalid: return "config_invalid";
    case ErrorCode::kAllFirmsExit: return "all_firms_exit";
    case ErrorCode::kPriceOutOfBounds: return "price_out_of_bounds";
    case ErrorCode::kNoConvergence: return "no_convergence";
    case ErrorCode::kConstraintViolated: return "constraint_violated";
    case ErrorCode::kSingularStageSystem: return "singular_stage_system";
    case ErrorCode::kOpponentStochastic: return "opponent_stochastic";
    case ErrorCode::kDivergedTraining: return "diverged_training";
    case ErrorCode::kLengthMismatch: return "length_mismatch";
    case ErrorCode::kConfigMismatch: return "config_mismatch";
    case ErrorCode::kEmptyInput: return "empty_input";
    case ErrorCode::kMissingColumns: return "missing_columns";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

std::string information_name(Information info) {
  return info == Information::kFullyObservable ? "full" : "partial";
}

Information information_from_name(const std::string& name) {
  if (name == "full" || name == "fully_observable") {
    return Information::kFullyObservable;
  }
  if (name == "partial" || name == "partially_observable") {
    return Information::kPartiallyObservable;
  }
  throw Error(ErrorCode::kConfigInvalid,
              "unknown information setting '" + name + "'");
}

double MarketConfig::demand_cap() const {
  double sq = 0.0;
  for (double d : initial_demands) sq += d * d;
  return std::sqrt(sq);
}

double MarketConfig::default_price_cap() const {
  const double c_max =
      unit_costs.empty() ? 0.0
                         : *std::max_element(unit_costs.begin(), unit_costs.end());
  return 0.5 * (demand_cap() + c_max);
}

void MarketConfig::validate() {
  if (n_agents < 1) throw Error(ErrorCode::kConfigInvalid, "n_agents must be >= 1");
  if (horizon < 1) throw Error(ErrorCode::kConfigInvalid, "horizon must be >= 1");
  if (static_cast<int>(unit_costs.size()) != n_agents) {
    throw Error(ErrorCode::kConfigInvalid, "unit_costs size != n_agents");
  }
  if (static_cast<int>(initial_demands.size()) != n_agents) {
    throw Error(ErrorCode::kConfigInvalid, "initial_demands size != n_agents");
  }
  for (double d : initial_demands) {
    if (!(d >= 0.0) || !std::isfinite(d)) {
      throw Error(ErrorCode::kConfigInvalid, "initial demands must be >= 0");
    }
  }
  if (p_max == 0.0) p_max = default_price_cap();
  if (!std::isfinite(p_max)) {
    throw Error(ErrorCode::kConfigInvalid, "p_max must be finite");
  }
  for (double c : unit_costs) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw Error(ErrorCode::kConfigInvalid, "unit costs must be >= 0");
    }
    if (!(c < p_max)) {
      throw Error(ErrorCode::kConfigInvalid,
                  "every unit cost must be < p_max");
    }
  }
}

std::uint64_t MarketConfig::hash() const {
  auto bits = [](double x) {
    std::uint64_t u;
    static_assert(sizeof(u) == sizeof(x));
    std::memcpy(&u, &x, sizeof(u));
    return u;
  };
  std::uint64_t h = mix_seed(0x6f6c69676f31ULL, static_cast<std::uint64_t>(n_agents),
                             static_cast<std::uint64_t>(horizon));
  for (double c : unit_costs) h = mix_seed(h, bits(c));
  for (double d : initial_demands) h = mix_seed(h, bits(d));
  h = mix_seed(h, dropouts_enabled ? 1u : 0u,
               information == Information::kFullyObservable ? 1u : 0u,
               bits(p_max));
  return h;
}

MarketConfig make_market_config(int n_agents, int horizon,
                                std::vector<double> unit_costs,
                                std::vector<double> initial_demands,
                                bool dropouts_enabled, Information information,
                                std::optional<double> p_max) {
  MarketConfig config;
  config.n_agents = n_agents;
  config.horizon = horizon;
  config.unit_costs = std::move(unit_costs);
  config.initial_demands = std::move(initial_demands);
  config.dropouts_enabled = dropouts_enabled;
  config.information = information;
  config.p_max = p_max.value_or(0.0);
  config.validate();
  return config;
}

MarketConfig experiment_config(double c0, bool dropouts_enabled,
                               Information information) {
  return make_market_config(3, 4, {c0, 0.8, 0.8}, {1.0, 1.0, 1.0},
                            dropouts_enabled, information);
}

int MarketState::num_active() const {
  int n = 0;
  for (auto a : active) n += a ? 1 : 0;
  return n;
}

MarketState initial_state(const MarketConfig& config) {
  MarketState state;
  state.t = 1;
  state.demands = config.initial_demands;
  state.active.assign(config.n_agents, 1);
  return state;
}

double stage_reward(double price, double cost, double demand) {
  return (price - cost) * (demand - price);
}

DropoutResult apply_dropouts(const std::vector<double>& tentative_demands,
                             const std::vector<double>& costs,
                             const std::vector<std::uint8_t>& active) {
  const int n = static_cast<int>(tentative_demands.size());
  DropoutResult result;
  result.demands.assign(n, 0.0);

  double exited_mass = 0.0;   // sum of squared tentative intercepts over exits
  double survivor_sum = 0.0;  // sum of surviving tentative intercepts
  std::vector<int> survivors;
  for (int i = 0; i < n; ++i) {
    if (!active[i]) continue;
    const double d = tentative_demands[i];
    if (d < costs[i]) {  // strict: exactly-at-cost survives
      result.new_exits.push_back(i);
      exited_mass += d * d;
    } else {
      result.demands[i] = d;
      survivor_sum += d;
      survivors.push_back(i);
    }
  }
  if (survivors.empty()) {
    throw Error(ErrorCode::kAllFirmsExit,
                "every active firm's tentative demand fell below its cost");
  }
  if (exited_mass > 0.0) {
    for (int i : survivors) {
      // Survivors can all sit at intercept 0 only when their cost is 0; the
      // area is then split equally so conservation still holds.
      const double share = survivor_sum > 0.0
                               ? result.demands[i] / survivor_sum
                               : 1.0 / static_cast<double>(survivors.size());
      result.demands[i] =
          std::sqrt(result.demands[i] * result.demands[i] + share * exited_mass);
    }
  }
  return result;
}

std::pair<MarketState, StageOutcome> step(const MarketState& state,
                                          const std::vector<double>& prices,
                                          const MarketConfig& config,
                                          AllExitHandling on_all_exit) {
  const int n = config.n_agents;
  StageOutcome outcome;
  outcome.prices.assign(n, 0.0);
  outcome.price_deltas.assign(n, 0.0);
  outcome.quantities.assign(n, 0.0);
  outcome.rewards.assign(n, 0.0);

  double price_sum = 0.0;
  int n_active = 0;
  for (int i = 0; i < n; ++i) {
    if (!state.active[i]) continue;  // prices at inactive indices are ignored
    const double p = prices[i];
    if (!(p >= config.unit_costs[i]) || !(p <= config.p_max)) {
      throw Error(ErrorCode::kPriceOutOfBounds,
                  "agent " + std::to_string(i) + " priced outside [cost, p_max]");
    }
    outcome.prices[i] = p;
    price_sum += p;
    ++n_active;
  }

  MarketState next;
  next.t = state.t + 1;
  next.demands.assign(n, 0.0);
  next.active = state.active;

  if (n_active == 0) {  // fully degenerate market, nothing happens
    return {next, outcome};
  }

  outcome.mean_price = price_sum / n_active;
  std::vector<double> tentative(n, 0.0);
  for (int i = 0; i < n; ++i) {
    if (!state.active[i]) continue;
    outcome.price_deltas[i] = outcome.prices[i] - outcome.mean_price;
    outcome.quantities[i] = state.demands[i] - outcome.prices[i];
    outcome.rewards[i] =
        stage_reward(outcome.prices[i], config.unit_costs[i], state.demands[i]);
    tentative[i] = state.demands[i] - outcome.price_deltas[i];
  }

  if (config.dropouts_enabled) {
    try {
      DropoutResult dropped =
          apply_dropouts(tentative, config.unit_costs, state.active);
      next.demands = std::move(dropped.demands);
      outcome.exits = std::move(dropped.new_exits);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kAllFirmsExit ||
          on_all_exit == AllExitHandling::kThrow) {
        throw;
      }
      for (int i = 0; i < n; ++i) {
        if (state.active[i]) outcome.exits.push_back(i);
      }
    }
    for (int i : outcome.exits) next.active[i] = 0;
  } else {
    for (int i = 0; i < n; ++i) {
      if (state.active[i]) next.demands[i] = tentative[i];
    }
  }
  return {next, outcome};
}

Observation observe(const MarketState& state, const MarketConfig& config,
                    int agent) {
  if (agent < 0 || agent >= config.n_agents) {
    throw Error(ErrorCode::kConfigInvalid, "invalid agent id");
  }
  Observation obs;
  obs.t = state.t;
  if (config.information == Information::kFullyObservable) {
    obs.full = true;
    obs.demands = state.demands;
    obs.active = state.active;
  }
  return obs;
}

}  // namespace oligo
