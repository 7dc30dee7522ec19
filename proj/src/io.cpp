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

#include "oligo/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace oligo {

using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kIo, "bad numeric field '" + s + "'");
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  out << content;
}

json config_to_json(const MarketConfig& config) {
  return json{{"n_agents", config.n_agents},
              {"horizon", config.horizon},
              {"unit_costs", config.unit_costs},
              {"initial_demands", config.initial_demands},
              {"dropouts", config.dropouts_enabled},
              {"information", information_name(config.information)},
              {"p_max", config.p_max}};
}

MarketConfig config_from_json(const json& j) {
  MarketConfig config;
  try {
    config.n_agents = j.at("n_agents").get<int>();
    config.horizon = j.at("horizon").get<int>();
    config.unit_costs = j.at("unit_costs").get<std::vector<double>>();
    config.initial_demands = j.at("initial_demands").get<std::vector<double>>();
    config.dropouts_enabled = j.at("dropouts").get<bool>();
    config.information =
        information_from_name(j.at("information").get<std::string>());
    config.p_max = j.value("p_max", 0.0);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigInvalid,
                std::string("malformed config: ") + e.what());
  }
  config.validate();
  return config;
}

MarketConfig load_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigInvalid,
                "config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

void save_config(const MarketConfig& config, const std::string& path) {
  write_text_file(path, config_to_json(config).dump(2) + "\n");
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  out << "stage,agent,active,demand,price,quantity,reward,exited_this_stage\n";
  const int n = static_cast<int>(traj.utilities.size());
  for (std::size_t t = 0; t < traj.outcomes.size(); ++t) {
    const MarketState& state = traj.states[t];
    const StageOutcome& outcome = traj.outcomes[t];
    for (int i = 0; i < n; ++i) {
      const bool exited =
          std::find(outcome.exits.begin(), outcome.exits.end(), i) !=
          outcome.exits.end();
      out << (t + 1) << ',' << i << ',' << (state.active[i] ? 1 : 0) << ','
          << format_double(state.demands[i]) << ','
          << format_double(outcome.prices[i]) << ','
          << format_double(outcome.quantities[i]) << ','
          << format_double(outcome.rewards[i]) << ',' << (exited ? 1 : 0)
          << '\n';
    }
  }
}

void save_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  write_trajectory_csv(traj, out);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  return fields;
}

}  // namespace

TrajectoryTable read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kMissingColumns, "empty trajectory file");
  }
  TrajectoryTable table;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < 8) {
      throw Error(ErrorCode::kMissingColumns, "short trajectory row");
    }
    const int stage = std::stoi(fields[0]);
    const int agent = std::stoi(fields[1]);
    table.horizon = std::max(table.horizon, stage);
    table.n_agents = std::max(table.n_agents, agent + 1);
    if (static_cast<int>(table.prices.size()) < stage) {
      table.prices.resize(stage);
      table.active.resize(stage);
    }
    if (static_cast<int>(table.prices[stage - 1].size()) < agent + 1) {
      table.prices[stage - 1].resize(agent + 1, 0.0);
      table.active[stage - 1].resize(agent + 1, 0);
    }
    table.prices[stage - 1][agent] = parse_double(fields[4]);
    table.active[stage - 1][agent] =
        static_cast<std::uint8_t>(std::stoi(fields[2]));
  }
  return table;
}

void write_report_csv(const VerificationReport& report, std::ostream& out) {
  out << "agent,K,current_value,br_value,loss,normalized_loss,"
         "denominator_flag\n";
  for (std::size_t i = 0; i < report.agents.size(); ++i) {
    const AgentVerification& a = report.agents[i];
    out << i << ',' << report.discretization << ','
        << format_double(a.current_value) << ','
        << format_double(a.best_response_value) << ','
        << format_double(a.loss) << ',' << format_double(a.normalized_loss)
        << ',' << (a.denominator_flag ? 1 : 0) << '\n';
  }
}

json report_to_json(const VerificationReport& report) {
  json agents = json::array();
  for (std::size_t i = 0; i < report.agents.size(); ++i) {
    const AgentVerification& a = report.agents[i];
    agents.push_back({{"agent", i},
                      {"current_value", a.current_value},
                      {"br_value", a.best_response_value},
                      {"loss", a.loss},
                      {"normalized_loss", a.normalized_loss},
                      {"denominator_flag", a.denominator_flag},
                      {"nodes", a.nodes}});
  }
  return json{{"format", "oligo-report-v1"},
              {"K", report.discretization},
              {"epsilon", report.epsilon},
              {"agents", agents}};
}

void write_training_log_csv(const std::vector<TrainingLogEntry>& log,
                            std::ostream& out) {
  out << "iteration,agent,mean_utility,lr\n";
  for (const TrainingLogEntry& entry : log) {
    out << entry.iteration << ',' << entry.agent << ','
        << format_double(entry.mean_utility) << ',' << format_double(entry.lr)
        << '\n';
  }
}

void write_coefficients_csv(const LinearFeedbackEquilibrium& eq,
                            std::ostream& out) {
  out << "t,agent,lambda1,lambda2\n";
  for (int t = 0; t < eq.lambda1.rows(); ++t) {
    for (int i = 0; i < eq.lambda1.cols(); ++i) {
      out << (t + 1) << ',' << i << ',' << format_double(eq.lambda1(t, i))
          << ',' << format_double(eq.lambda2(t, i)) << '\n';
    }
  }
}

namespace {

constexpr const char* kProfileFormat = "oligo-profile-v1";

json policy_to_json(const Policy& policy) {
  if (const auto* table = dynamic_cast<const TablePolicy*>(&policy)) {
    return json{{"type", "table"}, {"prices", table->prices()}};
  }
  if (const auto* affine = dynamic_cast<const AffineDemandPolicy*>(&policy)) {
    return json{{"type", "affine"},
                {"lambda1", affine->lambda1()},
                {"lambda2", affine->lambda2()},
                {"price_lo", affine->price_lo()},
                {"price_hi", affine->price_hi()}};
  }
  if (const auto* neural = dynamic_cast<const NeuralPolicy*>(&policy)) {
    return json{{"type", "neural"},
                {"layer_sizes", neural->actor().sizes()},
                {"params", neural->actor().flatten()},
                {"price_lo", neural->price_lo()},
                {"price_hi", neural->price_hi()},
                {"stochastic", !neural->deterministic()}};
  }
  throw Error(ErrorCode::kIo, "policy type has no serialization");
}

}  // namespace

json profile_to_json(const StrategyProfile& profile,
                     const MarketConfig& config) {
  json policies = json::array();
  for (const auto& policy : profile) policies.push_back(policy_to_json(*policy));
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(config.hash()));
  return json{{"format", kProfileFormat},
              {"config_hash", hash},
              {"information", information_name(config.information)},
              {"policies", policies}};
}

StrategyProfile profile_from_json(const json& j, const MarketConfig& config) {
  if (j.value("format", "") != kProfileFormat) {
    throw Error(ErrorCode::kIo, "unknown profile format");
  }
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(config.hash()));
  if (j.value("config_hash", "") != hash) {
    throw Error(ErrorCode::kConfigMismatch,
                "profile was built for a different config");
  }
  const ObservationEncoder encoder = ObservationEncoder::for_config(config);
  StrategyProfile profile;
  for (const json& pj : j.at("policies")) {
    const std::string type = pj.at("type").get<std::string>();
    if (type == "table") {
      profile.push_back(std::make_shared<TablePolicy>(
          pj.at("prices").get<std::vector<double>>()));
    } else if (type == "affine") {
      profile.push_back(std::make_shared<AffineDemandPolicy>(
          static_cast<int>(profile.size()),
          pj.at("lambda1").get<std::vector<double>>(),
          pj.at("lambda2").get<std::vector<double>>(),
          pj.at("price_lo").get<double>(), pj.at("price_hi").get<double>()));
    } else if (type == "neural") {
      nn::Mlp net(pj.at("layer_sizes").get<std::vector<int>>(), 0);
      net.load_flat(pj.at("params").get<std::vector<double>>());
      profile.push_back(std::make_shared<NeuralPolicy>(
          std::move(net), encoder, pj.at("price_lo").get<double>(),
          pj.at("price_hi").get<double>(),
          pj.value("stochastic", false) ? NeuralPolicy::Mode::kSample
                                        : NeuralPolicy::Mode::kMode));
    } else {
      throw Error(ErrorCode::kIo, "unknown policy type '" + type + "'");
    }
  }
  if (static_cast<int>(profile.size()) != config.n_agents) {
    throw Error(ErrorCode::kConfigMismatch,
                "profile agent count does not match the config");
  }
  return profile;
}

void save_profile(const StrategyProfile& profile, const MarketConfig& config,
                  const std::string& path) {
  write_text_file(path, profile_to_json(profile, config).dump() + "\n");
}

StrategyProfile load_profile(const std::string& path,
                             const MarketConfig& config) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIo,
                "profile '" + path + "' is not valid JSON: " + e.what());
  }
  return profile_from_json(j, config);
}

}  // namespace oligo
