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

#ifndef OLIGO_METRICS_HPP_
#define OLIGO_METRICS_HPP_

#include <optional>
#include <string>
#include <vector>

#include "oligo/market.hpp"

namespace oligo {

struct PredationRecord {
  int agent = 0;
  std::optional<int> tau;     // first stage in which an opponent exits
  double sacrifice = 0.0;     // forgone profit before tau, vs the benchmark
  double recoupment = 0.0;    // excess profit from tau on
  double pi = 0.0;            // recoupment - sacrifice; 0 without an exit
};

// Stage rewards of one agent along a trajectory.
std::vector<double> agent_rewards(const Trajectory& traj, int agent);

// First stage whose outcome contains an exit of someone other than `agent`.
std::optional<int> first_opponent_exit(const Trajectory& traj, int agent);

// Sacrifice/recoupment decomposition against the no-dropout equilibrium
// rewards; only deliberate losses and genuine gains count (max operators).
PredationRecord predatory_incentive(const std::vector<double>& pi_rewards,
                                    const std::vector<double>& equ_rewards,
                                    std::optional<int> tau);

struct StageSurplus {
  double producer = 0.0;  // sum of active firms' rewards
  double consumer = 0.0;  // sum of squared quantities under unit-slope demand
};

StageSurplus surplus(const StageOutcome& outcome);

struct WelfareRecord {
  std::vector<double> producer_per_stage;
  std::vector<double> consumer_per_stage;
  double producer_total = 0.0;
  double consumer_total = 0.0;
  double welfare = 0.0;
  double d_producer = 0.0;
  double d_consumer = 0.0;
  double d_welfare = 0.0;
};

WelfareRecord welfare_of(const Trajectory& traj);

// Stage-summed surplus deltas of `traj` against an equilibrium baseline of
// the same shape; throws Error(kConfigMismatch) on shape mismatch.
WelfareRecord welfare_difference(const Trajectory& traj,
                                 const Trajectory& baseline);

enum class RegimeLabel {
  kDominance,
  kPredation,
  kCompetition,
  kMarginalization,
  kOther,
};

std::string regime_name(RegimeLabel label);
RegimeLabel regime_from_name(const std::string& name);

// Exit-pattern classification of the 3-firm experiment layout, where firm 0
// carries the varied cost.
RegimeLabel classify_regime(const Trajectory& traj);

// Most frequent label; ties break toward the less competitive regime.
RegimeLabel aggregate_regime(const std::vector<RegimeLabel>& labels);

}  // namespace oligo

#endif  // OLIGO_METRICS_HPP_
