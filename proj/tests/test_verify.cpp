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

#include <cmath>
#include <doctest.h>
#include <limits>

#include "oligo/analytic.hpp"
#include "oligo/learn.hpp"
#include "oligo/rng.hpp"

using namespace oligo;

namespace {

// Independent oracle: enumerate every open price sequence on the grid and
// replay it through the public rollout path.
double naive_best_response(const StrategyProfile& profile, int agent, int K,
                           const MarketConfig& config) {
  const std::vector<double> grid = action_grid(agent, K, config);
  const int horizon = config.horizon;
  std::vector<int> digits(horizon, 0);
  double best = -std::numeric_limits<double>::infinity();
  RolloutOptions options;
  options.on_all_exit = AllExitHandling::kDegenerate;
  for (;;) {
    std::vector<double> sequence(horizon);
    for (int t = 0; t < horizon; ++t) sequence[t] = grid[digits[t]];
    StrategyProfile deviated = profile;
    deviated[agent] = std::make_shared<TablePolicy>(std::move(sequence));
    best = std::max(best, rollout(deviated, config, options).utilities[agent]);
    int pos = horizon - 1;
    while (pos >= 0 && ++digits[pos] == K) digits[pos--] = 0;
    if (pos < 0) break;
  }
  return best;
}

MarketConfig random_config(RngStream& stream) {
  const int n = 1 + static_cast<int>(stream.bits() % 3);
  const int horizon = 1 + static_cast<int>(stream.bits() % 2);
  std::vector<double> costs(n), demands(n);
  double c_max = 0.0;
  for (int i = 0; i < n; ++i) {
    costs[i] = stream.uniform(0.1, 0.9);
    demands[i] = stream.uniform(0.3, 1.5);
    c_max = std::max(c_max, costs[i]);
  }
  return make_market_config(
      n, horizon, std::move(costs), std::move(demands), stream.bits() % 2 == 0,
      stream.bits() % 2 == 0 ? Information::kFullyObservable
                             : Information::kPartiallyObservable,
      c_max + stream.uniform(0.2, 0.8));
}

StrategyProfile random_table_profile(const MarketConfig& config,
                                     RngStream& stream) {
  StrategyProfile profile;
  for (int i = 0; i < config.n_agents; ++i) {
    std::vector<double> prices(config.horizon);
    for (double& p : prices) {
      p = stream.uniform(config.unit_costs[i], config.p_max);
    }
    profile.push_back(std::make_shared<TablePolicy>(std::move(prices)));
  }
  return profile;
}

}  // namespace

TEST_CASE("action grid endpoints and spacing") {
  MarketConfig config = make_market_config(1, 1, {0.8}, {1.0}, false,
                                           Information::kPartiallyObservable,
                                           1.0);
  CHECK(action_grid(0, 2, config) == std::vector<double>{0.8, 1.0});
  const std::vector<double> three = action_grid(0, 3, config);
  CHECK(three[0] == 0.8);
  CHECK(three[1] == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(three[2] == 1.0);
  const std::vector<double> grid = action_grid(0, 32, config);
  CHECK(grid[1] - grid[0] == doctest::Approx(0.2 / 31.0).epsilon(1e-9));
  CHECK_THROWS_AS(action_grid(0, 1, config), Error);
}

TEST_CASE("one-stage monopoly brute force picks the grid optimum") {
  MarketConfig config = make_market_config(1, 1, {0.8}, {1.0}, false,
                                           Information::kPartiallyObservable,
                                           1.0);
  StrategyProfile profile{std::make_shared<TablePolicy>(std::vector<double>{0.82})};
  std::uint64_t nodes = 0;
  const double value = best_response_value(profile, 0, 3, config, &nodes);
  CHECK(value == doctest::Approx(0.01).epsilon(1e-12));  // price 0.9 of {0.8,0.9,1.0}
  CHECK(nodes == 3);
}

TEST_CASE("node count follows the geometric sum") {
  MarketConfig config = make_market_config(3, 4, {0.8, 0.8, 0.8},
                                           {1.0, 1.0, 1.0}, false,
                                           Information::kPartiallyObservable);
  const OpenLoopEquilibrium eq = solve_open_loop_ne(config);
  const StrategyProfile profile = open_loop_profile(eq);
  std::uint64_t nodes = 0;
  best_response_value(profile, 0, 4, config, &nodes);
  CHECK(nodes == 4 + 16 + 64 + 256);
}

TEST_CASE("oracle equivalence against exhaustive sequence enumeration") {
  RngStream stream(0x0AC1E);
  for (int trial = 0; trial < 100; ++trial) {
    const MarketConfig config = random_config(stream);
    const StrategyProfile profile = random_table_profile(config, stream);
    const int agent = static_cast<int>(stream.bits() % config.n_agents);
    const int K = 2 + static_cast<int>(stream.bits() % 7);
    const double dfs = best_response_value(profile, agent, K, config);
    const double naive = naive_best_response(profile, agent, K, config);
    CHECK(dfs == naive);  // bit-exact: same arithmetic on both paths
  }
}

TEST_CASE("best response never decreases on nested grid refinement") {
  RngStream stream(0x4E57);
  for (int trial = 0; trial < 20; ++trial) {
    const MarketConfig config = random_config(stream);
    const StrategyProfile profile = random_table_profile(config, stream);
    const int agent = static_cast<int>(stream.bits() % config.n_agents);
    double previous = -std::numeric_limits<double>::infinity();
    for (int K : {3, 5, 9, 17}) {  // each grid contains the one before
      const double value = best_response_value(profile, agent, K, config);
      CHECK(value >= previous - 1e-12);
      previous = value;
    }
  }
}

TEST_CASE("verifier certifies the analytic equilibria at a coarse grid") {
  MarketConfig config = make_market_config(3, 4, {0.8, 0.8, 0.8},
                                           {1.0, 1.0, 1.0}, false,
                                           Information::kPartiallyObservable);
  const StrategyProfile open = open_loop_profile(solve_open_loop_ne(config));
  const VerificationReport report = verify_profile(open, 8, config);
  for (const AgentVerification& agent : report.agents) {
    CHECK(agent.loss >= 0.0);
    CHECK(agent.loss <= 5e-3);  // bounded by the K=8 grid resolution
    CHECK(agent.current_value == doctest::Approx(0.030851).epsilon(1e-4));
  }

  MarketConfig full = config;
  full.information = Information::kFullyObservable;
  const StrategyProfile feedback =
      feedback_profile(solve_feedback_ne(full), full);
  const VerificationReport fb_report = verify_profile(feedback, 8, full);
  for (const AgentVerification& agent : fb_report.agents) {
    CHECK(agent.loss <= 5e-3);
  }
}

TEST_CASE("a rigid overpricer against aggressive rivals is exploitable") {
  MarketConfig config = experiment_config(0.8, true,
                                          Information::kPartiallyObservable);
  StrategyProfile profile{
      std::make_shared<TablePolicy>(
          std::vector<double>(4, config.p_max)),  // prices at the cap
      std::make_shared<TablePolicy>(std::vector<double>(4, 0.8)),
      std::make_shared<TablePolicy>(std::vector<double>(4, 0.8))};
  const VerificationReport report = verify_profile(profile, 8, config);
  CHECK(report.agents[0].loss > 0.01);
}

TEST_CASE("replacing the agent with its best-response table closes the gap") {
  MarketConfig config = make_market_config(3, 3, {0.6, 0.8, 0.8},
                                           {1.0, 1.0, 1.0}, true,
                                           Information::kPartiallyObservable);
  StrategyProfile profile{
      std::make_shared<TablePolicy>(std::vector<double>{0.8, 0.8, 0.9}),
      std::make_shared<TablePolicy>(std::vector<double>{0.85, 0.85, 0.9}),
      std::make_shared<TablePolicy>(std::vector<double>{0.9, 0.9, 0.95})};
  const int K = 9;
  const int agent = 0;
  const double br = best_response_value(profile, agent, K, config);

  // recover the argmax sequence by greedy re-enumeration
  const std::vector<double> grid = action_grid(agent, K, config);
  std::vector<int> digits(config.horizon, 0);
  std::vector<double> best_seq;
  double best = -std::numeric_limits<double>::infinity();
  RolloutOptions options;
  options.on_all_exit = AllExitHandling::kDegenerate;
  for (;;) {
    std::vector<double> sequence(config.horizon);
    for (int t = 0; t < config.horizon; ++t) sequence[t] = grid[digits[t]];
    StrategyProfile deviated = profile;
    deviated[agent] = std::make_shared<TablePolicy>(sequence);
    const double value = rollout(deviated, config, options).utilities[agent];
    if (value > best) {
      best = value;
      best_seq = sequence;
    }
    int pos = config.horizon - 1;
    while (pos >= 0 && ++digits[pos] == K) digits[pos--] = 0;
    if (pos < 0) break;
  }
  REQUIRE(best == br);

  StrategyProfile replaced = profile;
  replaced[agent] = std::make_shared<TablePolicy>(best_seq);
  const VerificationReport report = verify_profile(replaced, K, config);
  CHECK(report.agents[agent].loss <= 1e-3);
}

TEST_CASE("results do not depend on the first-stage split") {
  MarketConfig config = experiment_config(0.6, true,
                                          Information::kFullyObservable);
  const StrategyProfile profile = analytic_profile_for(config);
  std::uint64_t n1 = 0, n3 = 0;
  const double v1 = best_response_value(profile, 1, 7, config, &n1, 1);
  const double v3 = best_response_value(profile, 1, 7, config, &n3, 3);
  CHECK(v1 == v3);
  CHECK(n1 == n3);
}

TEST_CASE("stochastic opponents need a Monte Carlo budget") {
  MarketConfig config = make_market_config(2, 2, {0.6, 0.8}, {1.0, 1.0}, false,
                                           Information::kPartiallyObservable);
  TrainConfig tc = TrainConfig::defaults_for(Algo::kReinforce);
  tc.iterations = 1;
  tc.trajectories_per_iteration = 20;
  tc.seed = 5;
  const LearnedProfile learned =
      train_selfplay(config, Algo::kReinforce, tc, {2, 4});
  const StrategyProfile sampling = learned.sampling_profile();

  CHECK_THROWS_AS(verify_profile(sampling, 3, config), Error);

  VerifyOptions options;
  options.discretization = 3;
  options.mc_samples = 4;
  const VerificationReport report = verify_profile(sampling, options, config);
  CHECK(report.agents.size() == 2);
  for (const AgentVerification& agent : report.agents) {
    CHECK(std::isfinite(agent.loss));
    CHECK(agent.loss >= 0.0);
  }
}
