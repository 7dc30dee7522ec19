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

#ifndef OLIGO_VERIFY_HPP_
#define OLIGO_VERIFY_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "oligo/market.hpp"
#include "oligo/profiles.hpp"

namespace oligo {

// K equidistant prices spanning [cost_i, p_max], endpoints included.
std::vector<double> action_grid(int agent, int K, const MarketConfig& config);

struct AgentVerification {
  double current_value = 0.0;
  double best_response_value = 0.0;
  double loss = 0.0;             // max(0, best response - current)
  double normalized_loss = 0.0;  // loss / best response value
  bool denominator_flag = false; // best response value below the threshold
  std::uint64_t nodes = 0;       // deviation actions evaluated (sum of K^t)
};

struct VerificationReport {
  std::vector<AgentVerification> agents;
  int discretization = 0;
  double epsilon = 0.0;  // max loss over agents
};

struct VerifyOptions {
  int discretization = 32;
  // First-stage branches are split over this many threads; the reduction is
  // a max, so the result is identical for any split.
  int workers = 1;
  // Monte Carlo realizations for stochastic opponents. Required whenever the
  // profile samples; each realization fixes the opponents' draws through
  // their inverse CDFs, and the per-realization best responses are averaged
  // (an upper bound on the best response against the mixed profile).
  std::optional<int> mc_samples;
  std::uint64_t mc_seed = 0;
  double denominator_threshold = 0.01;
};

// Exact maximum of `agent`'s utility over all depth-T deviation trees with
// branching factor K. Opponents and dynamics being deterministic, the
// reachable history is pinned by the agent's own action prefix, so
// depth-first enumeration of sum_t K^t nodes is exact for both information
// settings.
double best_response_value(const StrategyProfile& profile, int agent, int K,
                           const MarketConfig& config,
                           std::uint64_t* nodes = nullptr, int workers = 1);

VerificationReport verify_profile(const StrategyProfile& profile, int K,
                                  const MarketConfig& config);
VerificationReport verify_profile(const StrategyProfile& profile,
                                  const VerifyOptions& options,
                                  const MarketConfig& config);

}  // namespace oligo

#endif  // OLIGO_VERIFY_HPP_
