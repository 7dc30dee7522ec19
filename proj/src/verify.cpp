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

#include "oligo/verify.hpp"

#include <algorithm>
#include <limits>
#include <thread>

#include "oligo/rng.hpp"

namespace oligo {

std::vector<double> action_grid(int agent, int K, const MarketConfig& config) {
  if (K < 2) {
    throw Error(ErrorCode::kConfigInvalid, "action grid needs K >= 2");
  }
  const double lo = config.unit_costs.at(agent);
  const double hi = config.p_max;
  std::vector<double> grid(K);
  for (int k = 0; k < K; ++k) {
    const double t = static_cast<double>(k) / (K - 1);
    grid[k] = (1.0 - t) * lo + t * hi;  // endpoints land exactly on lo and hi
  }
  return grid;
}

namespace {

struct BrSearch {
  const StrategyProfile* profile;
  const MarketConfig* config;
  int agent;
  const std::vector<double>* grid;
  std::uint64_t nodes = 0;

  double run(const MarketState& state) {
    if (state.t > config->horizon || !state.active[agent]) return 0.0;
    std::vector<double> prices(config->n_agents, 0.0);
    for (int j = 0; j < config->n_agents; ++j) {
      if (j == agent || !state.active[j]) continue;
      prices[j] = (*profile)[j]->act(observe(state, *config, j), nullptr);
    }
    double best = -std::numeric_limits<double>::infinity();
    for (double p : *grid) {
      prices[agent] = p;
      ++nodes;
      auto [next, outcome] =
          step(state, prices, *config, AllExitHandling::kDegenerate);
      const double value = outcome.rewards[agent] + run(next);
      best = std::max(best, value);
    }
    return best;
  }
};

// Deterministic stand-in for a stochastic policy: one fixed uniform draw per
// (realization, stage) pushed through the inverse CDF.
class QuantileRealizationPolicy : public Policy {
 public:
  QuantileRealizationPolicy(std::shared_ptr<const Policy> base, int horizon,
                            std::uint64_t seed) : base_(std::move(base)) {
    RngStream stream(seed);
    uniforms_.resize(horizon);
    for (double& u : uniforms_) u = stream.uniform();
  }

  double act(const Observation& obs, RngStream*) const override {
    return base_->act_quantile(obs, uniforms_.at(obs.t - 1));
  }

 private:
  std::shared_ptr<const Policy> base_;
  std::vector<double> uniforms_;
};

StrategyProfile fix_realization(const StrategyProfile& profile,
                                const MarketConfig& config,
                                std::uint64_t mc_seed, int realization) {
  StrategyProfile fixed;
  for (std::size_t j = 0; j < profile.size(); ++j) {
    if (profile[j]->deterministic()) {
      fixed.push_back(profile[j]);
    } else {
      fixed.push_back(std::make_shared<QuantileRealizationPolicy>(
          profile[j], config.horizon,
          mix_seed(mc_seed, static_cast<std::uint64_t>(realization),
                   static_cast<std::uint64_t>(j))));
    }
  }
  return fixed;
}

}  // namespace

double best_response_value(const StrategyProfile& profile, int agent, int K,
                           const MarketConfig& config, std::uint64_t* nodes,
                           int workers) {
  const std::vector<double> grid = action_grid(agent, K, config);
  const MarketState root = initial_state(config);

  std::vector<double> root_prices(config.n_agents, 0.0);
  for (int j = 0; j < config.n_agents; ++j) {
    if (j == agent) continue;
    root_prices[j] = profile[j]->act(observe(root, config, j), nullptr);
  }

  std::vector<double> values(K);
  std::vector<std::uint64_t> counts(K, 1);
  auto expand = [&](int k) {
    BrSearch search{&profile, &config, agent, &grid};
    std::vector<double> prices = root_prices;
    prices[agent] = grid[k];
    auto [next, outcome] =
        step(root, prices, config, AllExitHandling::kDegenerate);
    values[k] = outcome.rewards[agent] + search.run(next);
    counts[k] += search.nodes;
  };

  if (workers <= 1) {
    for (int k = 0; k < K; ++k) expand(k);
  } else {
    std::vector<std::thread> pool;
    const int n_threads = std::min(workers, K);
    for (int w = 0; w < n_threads; ++w) {
      pool.emplace_back([&, w] {
        for (int k = w; k < K; k += n_threads) expand(k);
      });
    }
    for (auto& t : pool) t.join();
  }

  double best = -std::numeric_limits<double>::infinity();
  std::uint64_t total = 0;
  for (int k = 0; k < K; ++k) {
    best = std::max(best, values[k]);
    total += counts[k];
  }
  if (nodes) *nodes = total;
  return best;
}

VerificationReport verify_profile(const StrategyProfile& profile, int K,
                                  const MarketConfig& config) {
  VerifyOptions options;
  options.discretization = K;
  return verify_profile(profile, options, config);
}

VerificationReport verify_profile(const StrategyProfile& profile,
                                  const VerifyOptions& options,
                                  const MarketConfig& config) {
  const bool deterministic = profile_deterministic(profile);
  if (!deterministic && !options.mc_samples.has_value()) {
    throw Error(ErrorCode::kOpponentStochastic,
                "stochastic profile needs mc_samples for verification");
  }

  VerificationReport report;
  report.discretization = options.discretization;
  report.agents.resize(config.n_agents);

  const int realizations = deterministic ? 1 : *options.mc_samples;
  RolloutOptions rollout_options;
  rollout_options.on_all_exit = AllExitHandling::kDegenerate;

  for (int i = 0; i < config.n_agents; ++i) {
    AgentVerification& agent = report.agents[i];
    for (int m = 0; m < realizations; ++m) {
      const StrategyProfile fixed =
          deterministic ? profile
                        : fix_realization(profile, config, options.mc_seed, m);
      std::uint64_t nodes = 0;
      agent.best_response_value +=
          best_response_value(fixed, i, options.discretization, config, &nodes,
                              options.workers);
      agent.current_value += rollout(fixed, config, rollout_options).utilities[i];
      agent.nodes += nodes;
    }
    agent.best_response_value /= realizations;
    agent.current_value /= realizations;
    agent.loss = std::max(0.0, agent.best_response_value - agent.current_value);
    agent.denominator_flag =
        agent.best_response_value < options.denominator_threshold;
    agent.normalized_loss = agent.best_response_value > 0.0
                                ? agent.loss / agent.best_response_value
                                : 0.0;
    report.epsilon = std::max(report.epsilon, agent.loss);
  }
  return report;
}

}  // namespace oligo
