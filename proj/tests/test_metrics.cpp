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

#include "oligo/metrics.hpp"

#include <cmath>
#include <doctest.h>

#include "oligo/analytic.hpp"
#include "oligo/profiles.hpp"
#include "oligo/rng.hpp"

using namespace oligo;

namespace {

Trajectory predation_trajectory(double c0 = 0.51) {
  // sacrifice early, then raise prices in the duopoly that follows
  MarketConfig config =
      experiment_config(c0, true, Information::kPartiallyObservable);
  StrategyProfile profile{
      std::make_shared<TablePolicy>(std::vector<double>{c0, c0, 0.90, 1.00}),
      std::make_shared<TablePolicy>(std::vector<double>(4, 0.80)),
      std::make_shared<TablePolicy>(std::vector<double>(4, 0.86))};
  return rollout(profile, config);
}

}  // namespace

TEST_CASE("predatory incentive decomposition on the worked example") {
  const std::vector<double> equ{0.005, 0.007, 0.009, 0.010};
  const std::vector<double> pi{0.001, 0.002, 0.020, 0.030};
  const PredationRecord record = predatory_incentive(pi, equ, 3);
  CHECK(record.sacrifice == doctest::Approx(0.009).epsilon(1e-12));
  CHECK(record.recoupment == doctest::Approx(0.031).epsilon(1e-12));
  CHECK(record.pi == doctest::Approx(0.022).epsilon(1e-12));
}

TEST_CASE("no exit means no predatory incentive") {
  const std::vector<double> equ{0.01, 0.01};
  const std::vector<double> pi{0.02, 0.0};
  const PredationRecord record = predatory_incentive(pi, equ, std::nullopt);
  CHECK(record.pi == 0.0);
  CHECK(record.sacrifice == 0.0);
  CHECK(record.recoupment == 0.0);
}

TEST_CASE("identical play nets zero predatory incentive even with an exit") {
  const std::vector<double> rewards{0.004, 0.006, 0.008, 0.01};
  const PredationRecord record = predatory_incentive(rewards, rewards, 2);
  CHECK(record.pi == 0.0);
}

TEST_CASE("mismatched reward lengths are rejected") {
  CHECK_THROWS_AS(predatory_incentive({0.1}, {0.1, 0.2}, 1), Error);
}

TEST_CASE("decomposition is bounded by the absolute reward gaps") {
  RngStream stream(0x9137);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> equ(4), pi(4);
    for (int t = 0; t < 4; ++t) {
      equ[t] = stream.uniform(-0.02, 0.05);
      pi[t] = stream.uniform(-0.02, 0.05);
    }
    const int tau = 1 + static_cast<int>(stream.bits() % 4);
    const PredationRecord record = predatory_incentive(pi, equ, tau);
    double pre = 0.0, post = 0.0;
    for (int t = 0; t < 4; ++t) {
      if (t + 1 < tau) pre += std::abs(equ[t] - pi[t]);
      else post += std::abs(pi[t] - equ[t]);
    }
    CHECK(record.sacrifice >= 0.0);
    CHECK(record.recoupment >= 0.0);
    CHECK(record.sacrifice <= pre + 1e-15);
    CHECK(record.recoupment <= post + 1e-15);
  }
}

TEST_CASE("surplus on a hand-computed stage") {
  MarketConfig config = make_market_config(2, 1, {0.8, 0.8}, {1.0, 1.0}, false,
                                           Information::kPartiallyObservable);
  MarketState state = initial_state(config);
  auto [next, outcome] = step(state, {0.9, 0.8}, config);
  const StageSurplus s = surplus(outcome);
  CHECK(s.producer == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(s.consumer == doctest::Approx(0.05).epsilon(1e-12));

  // pricing at the intercept gives zero quantities, hence zero surplus
  auto [ignored, flat] = step(state, {1.0, 1.0}, config);
  const StageSurplus zero = surplus(flat);
  CHECK(zero.producer == 0.0);
  CHECK(zero.consumer == 0.0);
}

TEST_CASE("monopoly stage surplus") {
  MarketConfig config = make_market_config(1, 1, {0.8}, {1.0}, false,
                                           Information::kPartiallyObservable,
                                           1.0);
  auto [next, outcome] = step(initial_state(config), {0.9}, config);
  const StageSurplus s = surplus(outcome);
  CHECK(s.producer == doctest::Approx(0.01));
  CHECK(s.consumer == doctest::Approx(0.01));
}

TEST_CASE("welfare of a trajectory sums stage surpluses exactly") {
  const Trajectory traj = predation_trajectory();
  const WelfareRecord record = welfare_of(traj);
  double ps = 0.0, cs = 0.0;
  for (const StageOutcome& outcome : traj.outcomes) {
    const StageSurplus s = surplus(outcome);
    ps += s.producer;
    cs += s.consumer;
  }
  CHECK(record.producer_total == ps);
  CHECK(record.consumer_total == cs);
  CHECK(record.welfare == ps + cs);
  for (double c : record.consumer_per_stage) CHECK(c >= 0.0);
}

TEST_CASE("welfare difference of a trajectory against itself is zero") {
  const Trajectory traj = predation_trajectory();
  const WelfareRecord record = welfare_difference(traj, traj);
  CHECK(record.d_producer == 0.0);
  CHECK(record.d_consumer == 0.0);
  CHECK(record.d_welfare == 0.0);
}

TEST_CASE("welfare difference rejects mismatched horizons") {
  const Trajectory traj = predation_trajectory();
  MarketConfig other = make_market_config(3, 2, {0.5, 0.8, 0.8},
                                          {1.0, 1.0, 1.0}, false,
                                          Information::kPartiallyObservable);
  const Trajectory baseline =
      rollout(open_loop_profile(solve_open_loop_ne(other)), other);
  CHECK_THROWS_AS(welfare_difference(traj, baseline), Error);
}

TEST_CASE("predation at c0=0.51 yields positive duopoly producer surplus") {
  const Trajectory traj = predation_trajectory();
  REQUIRE(classify_regime(traj) == RegimeLabel::kPredation);

  MarketConfig config =
      experiment_config(0.51, false, Information::kPartiallyObservable);
  const Trajectory baseline = rollout(analytic_profile_for(config), config);
  const WelfareRecord welfare = welfare_difference(traj, baseline);

  // after the rival exits, the survivors' stage surplus beats the benchmark
  const std::optional<int> tau = first_opponent_exit(traj, 0);
  REQUIRE(tau.has_value());
  CHECK(*tau <= 3);
  const WelfareRecord base = welfare_of(baseline);
  double dps_post = 0.0;
  for (std::size_t t = *tau; t < traj.outcomes.size(); ++t) {
    dps_post += welfare.producer_per_stage[t] - base.producer_per_stage[t];
  }
  CHECK(dps_post > 0.0);
}

TEST_CASE("regime classification covers all exit patterns") {
  const Trajectory predation = predation_trajectory();
  CHECK(classify_regime(predation) == RegimeLabel::kPredation);
  CHECK(first_opponent_exit(predation, 0).value() == 2);

  MarketConfig config =
      experiment_config(0.8, true, Information::kPartiallyObservable);
  StrategyProfile symmetric{
      std::make_shared<TablePolicy>(std::vector<double>(4, 0.9)),
      std::make_shared<TablePolicy>(std::vector<double>(4, 0.9)),
      std::make_shared<TablePolicy>(std::vector<double>(4, 0.9))};
  const Trajectory competition = rollout(symmetric, config);
  CHECK(classify_regime(competition) == RegimeLabel::kCompetition);
  CHECK_FALSE(first_opponent_exit(competition, 0).has_value());

  // the cost-disadvantaged firm 0 is pushed out
  MarketConfig hard =
      experiment_config(0.95, true, Information::kPartiallyObservable);
  StrategyProfile rivals_attack{
      std::make_shared<TablePolicy>(std::vector<double>(4, 1.0)),
      std::make_shared<TablePolicy>(std::vector<double>(4, 0.8)),
      std::make_shared<TablePolicy>(std::vector<double>(4, 0.8))};
  const Trajectory marginalization = rollout(rivals_attack, hard);
  CHECK(classify_regime(marginalization) == RegimeLabel::kMarginalization);

  // firm 0 dominates both rivals
  MarketConfig easy =
      experiment_config(0.42, true, Information::kPartiallyObservable);
  StrategyProfile dominator{
      std::make_shared<TablePolicy>(std::vector<double>(4, 0.42)),
      std::make_shared<TablePolicy>(std::vector<double>(4, 0.9)),
      std::make_shared<TablePolicy>(std::vector<double>(4, 0.9))};
  const Trajectory dominance = rollout(dominator, easy);
  CHECK(classify_regime(dominance) == RegimeLabel::kDominance);
}

TEST_CASE("pi is identically zero when dropouts are disabled") {
  MarketConfig config =
      experiment_config(0.51, false, Information::kPartiallyObservable);
  const StrategyProfile profile = analytic_profile_for(config);
  const Trajectory traj = rollout(profile, config);
  const Trajectory baseline = rollout(profile, config);
  for (int agent = 0; agent < 3; ++agent) {
    const PredationRecord record = predatory_incentive(
        agent_rewards(traj, agent), agent_rewards(baseline, agent),
        first_opponent_exit(traj, agent));
    CHECK_FALSE(record.tau.has_value());
    CHECK(record.pi == 0.0);
  }
}

TEST_CASE("majority vote and the severity tie-break") {
  using R = RegimeLabel;
  CHECK(aggregate_regime({R::kPredation, R::kPredation, R::kCompetition}) ==
        R::kPredation);
  CHECK(aggregate_regime({R::kCompetition}) == R::kCompetition);
  CHECK(aggregate_regime({R::kDominance, R::kPredation}) == R::kDominance);
  CHECK(aggregate_regime({R::kMarginalization, R::kCompetition}) ==
        R::kCompetition);
  CHECK(aggregate_regime({R::kOther, R::kMarginalization}) ==
        R::kMarginalization);
  CHECK_THROWS_AS(aggregate_regime({}), Error);
}

TEST_CASE("regime names round-trip") {
  for (RegimeLabel label :
       {RegimeLabel::kDominance, RegimeLabel::kPredation,
        RegimeLabel::kCompetition, RegimeLabel::kMarginalization,
        RegimeLabel::kOther}) {
    CHECK(regime_from_name(regime_name(label)) == label);
  }
}
