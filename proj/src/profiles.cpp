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

#include "oligo/profiles.hpp"

#include <algorithm>

namespace oligo {

bool profile_deterministic(const StrategyProfile& profile) {
  return std::all_of(profile.begin(), profile.end(),
                     [](const auto& p) { return p->deterministic(); });
}

double AffineDemandPolicy::act(const Observation& obs, RngStream*) const {
  if (!obs.full) {
    throw Error(ErrorCode::kConfigInvalid,
                "affine demand policy needs full observability");
  }
  const std::size_t t = static_cast<std::size_t>(obs.t) - 1;
  const double p = lambda1_.at(t) + lambda2_.at(t) * obs.demands.at(agent_);
  return std::clamp(p, lo_, hi_);
}

Trajectory rollout(const StrategyProfile& profile, const MarketConfig& config,
                   const RolloutOptions& options) {
  if (static_cast<int>(profile.size()) != config.n_agents) {
    throw Error(ErrorCode::kConfigInvalid,
                "profile must supply one policy per agent");
  }
  if (!profile_deterministic(profile) && !options.seed.has_value()) {
    throw Error(ErrorCode::kConfigInvalid,
                "stochastic profile rolled out without a seed");
  }
  std::optional<RngStream> stream;
  if (options.seed) stream.emplace(mix_seed(*options.seed));

  Trajectory traj;
  traj.states.reserve(config.horizon + 1);
  traj.outcomes.reserve(config.horizon);
  traj.utilities.assign(config.n_agents, 0.0);
  traj.states.push_back(initial_state(config));

  std::vector<double> prices(config.n_agents, 0.0);
  for (int t = 1; t <= config.horizon; ++t) {
    const MarketState& state = traj.states.back();
    for (int i = 0; i < config.n_agents; ++i) {
      if (!state.active[i]) continue;
      prices[i] = profile[i]->act(observe(state, config, i),
                                  stream ? &*stream : nullptr);
    }
    auto [next, outcome] = step(state, prices, config, options.on_all_exit);
    for (int i = 0; i < config.n_agents; ++i) {
      traj.utilities[i] += outcome.rewards[i];
    }
    traj.outcomes.push_back(std::move(outcome));
    traj.states.push_back(std::move(next));
  }
  return traj;
}

}  // namespace oligo
