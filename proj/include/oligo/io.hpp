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

#ifndef OLIGO_IO_HPP_
#define OLIGO_IO_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "oligo/analytic.hpp"
#include "oligo/learn.hpp"
#include "oligo/market.hpp"
#include "oligo/profiles.hpp"
#include "oligo/verify.hpp"

namespace oligo {

// Market configs as structured text with the keys n_agents, horizon,
// initial_demands, unit_costs, dropouts, information, p_max. A missing p_max
// falls back to the default cap.
nlohmann::json config_to_json(const MarketConfig& config);
MarketConfig config_from_json(const nlohmann::json& j);
MarketConfig load_config(const std::string& path);
void save_config(const MarketConfig& config, const std::string& path);

// Trajectories: one row per (stage, agent).
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);
void save_trajectory_csv(const Trajectory& traj, const std::string& path);

// Prices/activity read back from a trajectory CSV, enough for plotting.
struct TrajectoryTable {
  int horizon = 0;
  int n_agents = 0;
  std::vector<std::vector<double>> prices;       // [stage][agent]
  std::vector<std::vector<std::uint8_t>> active; // [stage][agent]
};
TrajectoryTable read_trajectory_csv(const std::string& path);

// Verification reports: per-agent CSV plus a single JSON summary record.
void write_report_csv(const VerificationReport& report, std::ostream& out);
nlohmann::json report_to_json(const VerificationReport& report);

void write_training_log_csv(const std::vector<TrainingLogEntry>& log,
                            std::ostream& out);

// Feedback-equilibrium coefficients: (t, agent, lambda1, lambda2).
void write_coefficients_csv(const LinearFeedbackEquilibrium& eq,
                            std::ostream& out);

// Strategy profiles (table, affine or neural policies) as a versioned JSON
// parameter file carrying the config hash they were built for.
nlohmann::json profile_to_json(const StrategyProfile& profile,
                               const MarketConfig& config);
StrategyProfile profile_from_json(const nlohmann::json& j,
                                  const MarketConfig& config);
void save_profile(const StrategyProfile& profile, const MarketConfig& config,
                  const std::string& path);
StrategyProfile load_profile(const std::string& path,
                             const MarketConfig& config);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

std::string format_double(double v);  // round-trip exact
double parse_double(const std::string& s);

}  // namespace oligo

#endif  // OLIGO_IO_HPP_
