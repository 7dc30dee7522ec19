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

#include <algorithm>
#include <array>

namespace oligo {

std::vector<double> agent_rewards(const Trajectory& traj, int agent) {
  std::vector<double> rewards;
  rewards.reserve(traj.outcomes.size());
  for (const StageOutcome& outcome : traj.outcomes) {
    rewards.push_back(outcome.rewards.at(agent));
  }
  return rewards;
}

std::optional<int> first_opponent_exit(const Trajectory& traj, int agent) {
  for (std::size_t t = 0; t < traj.outcomes.size(); ++t) {
    for (int j : traj.outcomes[t].exits) {
      if (j != agent) return static_cast<int>(t) + 1;
    }
  }
  return std::nullopt;
}

PredationRecord predatory_incentive(const std::vector<double>& pi_rewards,
                                    const std::vector<double>& equ_rewards,
                                    std::optional<int> tau) {
  if (pi_rewards.size() != equ_rewards.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "reward sequences differ in length");
  }
  PredationRecord record;
  record.tau = tau;
  if (!tau.has_value()) return record;  // no exit, no predatory incentive
  const int split = *tau;
  for (std::size_t t = 0; t < pi_rewards.size(); ++t) {
    const int stage = static_cast<int>(t) + 1;
    if (stage < split) {
      record.sacrifice += std::max(0.0, equ_rewards[t] - pi_rewards[t]);
    } else {
      record.recoupment += std::max(0.0, pi_rewards[t] - equ_rewards[t]);
    }
  }
  record.pi = record.recoupment - record.sacrifice;
  return record;
}

StageSurplus surplus(const StageOutcome& outcome) {
  StageSurplus s;
  for (std::size_t i = 0; i < outcome.rewards.size(); ++i) {
    s.producer += outcome.rewards[i];
    s.consumer += outcome.quantities[i] * outcome.quantities[i];
  }
  return s;
}

WelfareRecord welfare_of(const Trajectory& traj) {
  WelfareRecord record;
  for (const StageOutcome& outcome : traj.outcomes) {
    const StageSurplus s = surplus(outcome);
    record.producer_per_stage.push_back(s.producer);
    record.consumer_per_stage.push_back(s.consumer);
    record.producer_total += s.producer;
    record.consumer_total += s.consumer;
  }
  record.welfare = record.producer_total + record.consumer_total;
  return record;
}

WelfareRecord welfare_difference(const Trajectory& traj,
                                 const Trajectory& baseline) {
  if (traj.outcomes.size() != baseline.outcomes.size() ||
      traj.utilities.size() != baseline.utilities.size()) {
    throw Error(ErrorCode::kConfigMismatch,
                "trajectory and baseline come from different games");
  }
  WelfareRecord record = welfare_of(traj);
  const WelfareRecord base = welfare_of(baseline);
  record.d_producer = record.producer_total - base.producer_total;
  record.d_consumer = record.consumer_total - base.consumer_total;
  record.d_welfare = record.welfare - base.welfare;
  return record;
}

std::string regime_name(RegimeLabel label) {
  switch (label) {
    case RegimeLabel::kDominance: return "dominance";
    case RegimeLabel::kPredation: return "predation";
    case RegimeLabel::kCompetition: return "competition";
    case RegimeLabel::kMarginalization: return "marginalization";
    case RegimeLabel::kOther: return "other";
  }
  return "other";
}

RegimeLabel regime_from_name(const std::string& name) {
  if (name == "dominance") return RegimeLabel::kDominance;
  if (name == "predation") return RegimeLabel::kPredation;
  if (name == "competition") return RegimeLabel::kCompetition;
  if (name == "marginalization") return RegimeLabel::kMarginalization;
  if (name == "other") return RegimeLabel::kOther;
  throw Error(ErrorCode::kConfigInvalid, "unknown regime '" + name + "'");
}

RegimeLabel classify_regime(const Trajectory& traj) {
  if (traj.utilities.size() != 3) {
    throw Error(ErrorCode::kConfigInvalid,
                "regimes are defined for the 3-firm layout");
  }
  const auto& active = traj.states.back().active;
  const bool out0 = !active[0];
  const bool out1 = !active[1];
  const bool out2 = !active[2];
  if (!out0 && out1 && out2) return RegimeLabel::kDominance;
  if (!out0 && (out1 != out2)) return RegimeLabel::kPredation;
  if (!out0 && !out1 && !out2) return RegimeLabel::kCompetition;
  if (out0 && !out1 && !out2) return RegimeLabel::kMarginalization;
  return RegimeLabel::kOther;
}

RegimeLabel aggregate_regime(const std::vector<RegimeLabel>& labels) {
  if (labels.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no regime labels to aggregate");
  }
  // Order doubles as the tie-break: less competitive regimes win ties.
  constexpr std::array<RegimeLabel, 5> order = {
      RegimeLabel::kDominance, RegimeLabel::kPredation,
      RegimeLabel::kCompetition, RegimeLabel::kMarginalization,
      RegimeLabel::kOther};
  std::array<int, 5> counts{};
  for (RegimeLabel label : labels) {
    counts[static_cast<int>(label)] += 1;
  }
  RegimeLabel best = RegimeLabel::kOther;
  int best_count = -1;
  for (RegimeLabel label : order) {
    const int c = counts[static_cast<int>(label)];
    if (c > best_count) {
      best = label;
      best_count = c;
    }
  }
  return best;
}

}  // namespace oligo
