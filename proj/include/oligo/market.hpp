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

#ifndef OLIGO_MARKET_HPP_
#define OLIGO_MARKET_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oligo/error.hpp"

namespace oligo {

enum class Information { kFullyObservable, kPartiallyObservable };

std::string information_name(Information info);
Information information_from_name(const std::string& name);

// Full definition of one game: firms, costs, horizon, initial demand
// intercepts, dropout rule, information setting and the price box.
struct MarketConfig {
  int n_agents = 0;
  int horizon = 0;
  std::vector<double> unit_costs;
  std::vector<double> initial_demands;
  bool dropouts_enabled = false;
  Information information = Information::kFullyObservable;
  // Upper price bound. 0 means "use default_price_cap()"; resolved by
  // validate() so a validated config always carries the effective value.
  double p_max = 0.0;

  // sqrt(sum of squared initial demands): the largest intercept any firm can
  // reach when exits redistribute demand area.
  double demand_cap() const;

  // (demand_cap + max cost) / 2; never clips the stage-wise monopoly price
  // (D + c) / 2 for any reachable intercept D.
  double default_price_cap() const;

  // Resolves p_max and checks the invariants; throws Error(kConfigInvalid).
  void validate();

  std::uint64_t hash() const;

  bool operator==(const MarketConfig& other) const = default;
};

MarketConfig make_market_config(int n_agents, int horizon,
                                std::vector<double> unit_costs,
                                std::vector<double> initial_demands,
                                bool dropouts_enabled, Information information,
                                std::optional<double> p_max = std::nullopt);

// The paper's 3-firm experiment layout: costs (c0, 0.8, 0.8), D1 = 1, T = 4.
MarketConfig experiment_config(double c0, bool dropouts_enabled,
                               Information information);

struct MarketState {
  int t = 1;  // stage about to be played, in 1..horizon
  std::vector<double> demands;
  std::vector<std::uint8_t> active;

  int num_active() const;
};

MarketState initial_state(const MarketConfig& config);

struct StageOutcome {
  std::vector<double> prices;        // 0 for inactive firms
  double mean_price = 0.0;           // over active firms
  std::vector<double> price_deltas;  // p_i - mean, 0 for inactive
  std::vector<double> quantities;
  std::vector<double> rewards;
  std::vector<int> exits;  // firms that became inactive this stage
};

struct Trajectory {
  std::vector<MarketState> states;    // length horizon + 1
  std::vector<StageOutcome> outcomes; // length horizon
  std::vector<double> utilities;      // per-firm sum of stage rewards
};

// (price - cost) * (demand - price); negative when price exceeds demand.
double stage_reward(double price, double cost, double demand);

struct DropoutResult {
  std::vector<double> demands;  // all firms; exited and inactive are 0
  std::vector<int> new_exits;
};

// Applies the exit rule to tentative next-stage demands: firms strictly below
// their unit cost leave, and the square of their tentative intercept is
// redistributed over survivors in proportion to survivor intercepts so the
// total area under the demand curves is preserved.
// Throws Error(kAllFirmsExit) when no active firm survives.
DropoutResult apply_dropouts(const std::vector<double>& tentative_demands,
                             const std::vector<double>& costs,
                             const std::vector<std::uint8_t>& active);

enum class AllExitHandling {
  kThrow,       // propagate Error(kAllFirmsExit)
  kDegenerate,  // mark every firm exited; later stages yield zero rewards
};

// Plays one stage: rewards from current demands, demand inertia update from
// the active-firm mean price, then the optional dropout step. Prices at
// inactive indices are ignored. Active firms must price inside
// [cost_i, p_max] or Error(kPriceOutOfBounds) is thrown.
std::pair<MarketState, StageOutcome> step(
    const MarketState& state, const std::vector<double>& prices,
    const MarketConfig& config,
    AllExitHandling on_all_exit = AllExitHandling::kThrow);

// What firm `agent` sees before pricing. Fully observable: stage, all
// intercepts and activity flags. Partially observable: the stage only.
struct Observation {
  int t = 1;
  bool full = false;
  std::vector<double> demands;       // empty under partial information
  std::vector<std::uint8_t> active;  // empty under partial information
};

Observation observe(const MarketState& state, const MarketConfig& config,
                    int agent);

}  // namespace oligo

#endif  // OLIGO_MARKET_HPP_
