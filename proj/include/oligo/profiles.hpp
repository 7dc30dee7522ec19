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

#ifndef OLIGO_PROFILES_HPP_
#define OLIGO_PROFILES_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "oligo/market.hpp"
#include "oligo/rng.hpp"

namespace oligo {

// One firm's pricing policy. Policies are only ever queried while the firm is
// active.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual bool deterministic() const { return true; }

  // Price given the firm's observation; `rng` is consulted only by stochastic
  // policies and may be null for deterministic ones.
  virtual double act(const Observation& obs, RngStream* rng = nullptr) const = 0;

  // Inverse-CDF action used by Monte Carlo verification of stochastic
  // policies; deterministic policies ignore the uniform draw.
  virtual double act_quantile(const Observation& obs, double u) const {
    (void)u;
    return act(obs, nullptr);
  }
};

// One policy per firm, firm index == position.
using StrategyProfile = std::vector<std::shared_ptr<const Policy>>;

bool profile_deterministic(const StrategyProfile& profile);

// Fixed price per stage; the natural form of open-loop equilibria and of
// profiles extracted under partial information.
class TablePolicy : public Policy {
 public:
  explicit TablePolicy(std::vector<double> prices_per_stage)
      : prices_(std::move(prices_per_stage)) {}

  double act(const Observation& obs, RngStream*) const override {
    return prices_.at(static_cast<std::size_t>(obs.t) - 1);
  }

  const std::vector<double>& prices() const { return prices_; }

 private:
  std::vector<double> prices_;
};

// p = lambda1[t] + lambda2[t] * own demand, clamped into the price box.
// Requires full observability (the policy reads its own intercept).
class AffineDemandPolicy : public Policy {
 public:
  AffineDemandPolicy(int agent, std::vector<double> lambda1,
                     std::vector<double> lambda2, double price_lo,
                     double price_hi)
      : agent_(agent),
        lambda1_(std::move(lambda1)),
        lambda2_(std::move(lambda2)),
        lo_(price_lo),
        hi_(price_hi) {}

  double act(const Observation& obs, RngStream*) const override;

  int agent() const { return agent_; }
  const std::vector<double>& lambda1() const { return lambda1_; }
  const std::vector<double>& lambda2() const { return lambda2_; }
  double price_lo() const { return lo_; }
  double price_hi() const { return hi_; }

 private:
  int agent_;
  std::vector<double> lambda1_, lambda2_;
  double lo_, hi_;
};

struct RolloutOptions {
  std::optional<std::uint64_t> seed;  // required by stochastic profiles
  AllExitHandling on_all_exit = AllExitHandling::kThrow;
};

// Plays the full horizon. Deterministic profiles yield bit-identical
// trajectories across calls; stochastic ones are reproducible given the seed.
Trajectory rollout(const StrategyProfile& profile, const MarketConfig& config,
                   const RolloutOptions& options = {});

}  // namespace oligo

#endif  // OLIGO_PROFILES_HPP_
