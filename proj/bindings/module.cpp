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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "oligo/analytic.hpp"
#include "oligo/io.hpp"
#include "oligo/learn.hpp"
#include "oligo/market.hpp"
#include "oligo/metrics.hpp"
#include "oligo/sweep.hpp"
#include "oligo/verify.hpp"

namespace py = pybind11;
using namespace oligo;

namespace {

std::vector<std::vector<double>> matrix_to_rows(const Eigen::MatrixXd& m) {
  std::vector<std::vector<double>> rows(m.rows());
  for (int r = 0; r < m.rows(); ++r) {
    rows[r].assign(m.row(r).begin(), m.row(r).end());
  }
  return rows;
}

Eigen::MatrixXd rows_to_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

std::vector<std::shared_ptr<Policy>> to_py_profile(const StrategyProfile& p) {
  std::vector<std::shared_ptr<Policy>> out;
  out.reserve(p.size());
  for (const auto& q : p) out.push_back(std::const_pointer_cast<Policy>(q));
  return out;
}

}  // namespace

PYBIND11_MODULE(_oligo, m) {
  m.doc() = "Finite-horizon dynamic oligopoly with demand inertia and "
            "dropouts: simulation, analytic equilibria, self-play learning, "
            "brute-force equilibrium verification and predation metrics.";

  py::register_exception<Error>(m, "OligoError");

  py::enum_<Information>(m, "Information")
      .value("FULL", Information::kFullyObservable)
      .value("PARTIAL", Information::kPartiallyObservable);

  py::enum_<Algo>(m, "Algo")
      .value("PPO", Algo::kPpo)
      .value("REINFORCE", Algo::kReinforce);

  py::enum_<RegimeLabel>(m, "RegimeLabel")
      .value("DOMINANCE", RegimeLabel::kDominance)
      .value("PREDATION", RegimeLabel::kPredation)
      .value("COMPETITION", RegimeLabel::kCompetition)
      .value("MARGINALIZATION", RegimeLabel::kMarginalization)
      .value("OTHER", RegimeLabel::kOther);

  py::class_<MarketConfig>(m, "MarketConfig")
      .def(py::init([](int n_agents, int horizon, std::vector<double> costs,
                       std::vector<double> demands, bool dropouts,
                       Information information, std::optional<double> p_max) {
             return make_market_config(n_agents, horizon, std::move(costs),
                                       std::move(demands), dropouts,
                                       information, p_max);
           }),
           py::arg("n_agents"), py::arg("horizon"), py::arg("unit_costs"),
           py::arg("initial_demands"), py::arg("dropouts") = false,
           py::arg("information") = Information::kFullyObservable,
           py::arg("p_max") = std::nullopt)
      .def_readonly("n_agents", &MarketConfig::n_agents)
      .def_readonly("horizon", &MarketConfig::horizon)
      .def_readonly("unit_costs", &MarketConfig::unit_costs)
      .def_readonly("initial_demands", &MarketConfig::initial_demands)
      .def_readonly("dropouts", &MarketConfig::dropouts_enabled)
      .def_readonly("information", &MarketConfig::information)
      .def_readonly("p_max", &MarketConfig::p_max)
      .def("demand_cap", &MarketConfig::demand_cap)
      .def("hash", &MarketConfig::hash)
      .def("to_json", [](const MarketConfig& c) { return config_to_json(c).dump(); })
      .def_static("from_json", [](const std::string& text) {
        return config_from_json(nlohmann::json::parse(text));
      })
      .def("__repr__", [](const MarketConfig& c) {
        return "<MarketConfig n=" + std::to_string(c.n_agents) +
               " T=" + std::to_string(c.horizon) + ">";
      });

  m.def("experiment_config", &experiment_config, py::arg("c0"),
        py::arg("dropouts"), py::arg("information"),
        "3-firm layout with costs (c0, 0.8, 0.8), unit demand, horizon 4");

  py::class_<MarketState>(m, "MarketState")
      .def_readonly("t", &MarketState::t)
      .def_readonly("demands", &MarketState::demands)
      .def_property_readonly("active", [](const MarketState& s) {
        std::vector<bool> active(s.active.begin(), s.active.end());
        return active;
      });

  py::class_<StageOutcome>(m, "StageOutcome")
      .def_readonly("prices", &StageOutcome::prices)
      .def_readonly("mean_price", &StageOutcome::mean_price)
      .def_readonly("price_deltas", &StageOutcome::price_deltas)
      .def_readonly("quantities", &StageOutcome::quantities)
      .def_readonly("rewards", &StageOutcome::rewards)
      .def_readonly("exits", &StageOutcome::exits);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("states", &Trajectory::states)
      .def_readonly("outcomes", &Trajectory::outcomes)
      .def_readonly("utilities", &Trajectory::utilities)
      .def("to_csv", [](const Trajectory& t) {
        std::ostringstream out;
        write_trajectory_csv(t, out);
        return out.str();
      });

  m.def("initial_state", &initial_state);
  m.def("stage_reward", &stage_reward, py::arg("price"), py::arg("cost"),
        py::arg("demand"));
  m.def(
      "apply_dropouts",
      [](const std::vector<double>& tentative, const std::vector<double>& costs,
         const std::vector<bool>& active) {
        std::vector<std::uint8_t> flags(active.begin(), active.end());
        const DropoutResult r = apply_dropouts(tentative, costs, flags);
        return py::make_tuple(r.demands, r.new_exits);
      },
      py::arg("tentative_demands"), py::arg("costs"), py::arg("active"));
  m.def(
      "step",
      [](const MarketState& state, const std::vector<double>& prices,
         const MarketConfig& config, bool degenerate_on_all_exit) {
        auto [next, outcome] =
            step(state, prices, config,
                 degenerate_on_all_exit ? AllExitHandling::kDegenerate
                                        : AllExitHandling::kThrow);
        return py::make_tuple(next, outcome);
      },
      py::arg("state"), py::arg("prices"), py::arg("config"),
      py::arg("degenerate_on_all_exit") = false);
  m.def(
      "observe",
      [](const MarketState& state, const MarketConfig& config, int agent) {
        const Observation obs = observe(state, config, agent);
        py::dict d;
        d["t"] = obs.t;
        d["full"] = obs.full;
        if (obs.full) {
          d["demands"] = obs.demands;
          d["active"] = std::vector<bool>(obs.active.begin(), obs.active.end());
        }
        return d;
      },
      py::arg("state"), py::arg("config"), py::arg("agent"));
  m.def(
      "encode_observation",
      [](const MarketState& state, const MarketConfig& config, int agent) {
        return encode_observation(observe(state, config, agent), config);
      },
      py::arg("state"), py::arg("config"), py::arg("agent"));

  py::class_<Policy, std::shared_ptr<Policy>>(m, "Policy");
  py::class_<TablePolicy, Policy, std::shared_ptr<TablePolicy>>(m, "TablePolicy")
      .def(py::init<std::vector<double>>(), py::arg("prices_per_stage"))
      .def_property_readonly("prices", &TablePolicy::prices);
  py::class_<AffineDemandPolicy, Policy, std::shared_ptr<AffineDemandPolicy>>(
      m, "AffineDemandPolicy")
      .def(py::init<int, std::vector<double>, std::vector<double>, double,
                    double>(),
           py::arg("agent"), py::arg("lambda1"), py::arg("lambda2"),
           py::arg("price_lo"), py::arg("price_hi"));
  py::class_<NeuralPolicy, Policy, std::shared_ptr<NeuralPolicy>>(
      m, "NeuralPolicy");

  m.def(
      "rollout",
      [](const std::vector<std::shared_ptr<Policy>>& policies,
         const MarketConfig& config, std::optional<std::uint64_t> seed,
         bool degenerate_on_all_exit) {
        StrategyProfile profile(policies.begin(), policies.end());
        RolloutOptions options;
        options.seed = seed;
        options.on_all_exit = degenerate_on_all_exit
                                  ? AllExitHandling::kDegenerate
                                  : AllExitHandling::kThrow;
        return rollout(profile, config, options);
      },
      py::arg("profile"), py::arg("config"), py::arg("seed") = std::nullopt,
      py::arg("degenerate_on_all_exit") = false);

  py::class_<OpenLoopEquilibrium>(m, "OpenLoopEquilibrium")
      .def_property_readonly("prices",
                             [](const OpenLoopEquilibrium& eq) {
                               return matrix_to_rows(eq.prices);
                             })
      .def_property_readonly("demands",
                             [](const OpenLoopEquilibrium& eq) {
                               return matrix_to_rows(eq.demands);
                             })
      .def_readonly("residual_norm", &OpenLoopEquilibrium::residual_norm);

  py::class_<LinearFeedbackEquilibrium>(m, "LinearFeedbackEquilibrium")
      .def_property_readonly("lambda1",
                             [](const LinearFeedbackEquilibrium& eq) {
                               return matrix_to_rows(eq.lambda1);
                             })
      .def_property_readonly("lambda2",
                             [](const LinearFeedbackEquilibrium& eq) {
                               return matrix_to_rows(eq.lambda2);
                             });

  m.def("solve_open_loop_ne",
        [](const MarketConfig& config) { return solve_open_loop_ne(config); });
  m.def("solve_feedback_ne", &solve_feedback_ne);
  m.def("foc_residuals",
        [](const std::vector<std::vector<double>>& prices,
           const MarketConfig& config) {
          const Eigen::VectorXd r = foc_residuals(rows_to_matrix(prices), config);
          return std::vector<double>(r.begin(), r.end());
        });
  m.def("check_second_order",
        [](const MarketConfig& config,
           const std::vector<std::vector<double>>& prices, double fd_step) {
          const SecondOrderReport report =
              check_second_order(config, rows_to_matrix(prices), fd_step);
          std::vector<std::vector<double>> eigenvalues;
          for (const auto& ev : report.eigenvalues) {
            eigenvalues.emplace_back(ev.begin(), ev.end());
          }
          return py::make_tuple(report.all_negative, eigenvalues);
        },
        py::arg("config"), py::arg("prices"), py::arg("fd_step") = 1e-5);
  m.def("open_loop_profile", [](const OpenLoopEquilibrium& eq) {
    return to_py_profile(open_loop_profile(eq));
  });
  m.def("feedback_profile",
        [](const LinearFeedbackEquilibrium& eq, const MarketConfig& config) {
          return to_py_profile(feedback_profile(eq, config));
        });
  m.def("analytic_profile_for", [](const MarketConfig& config) {
    return to_py_profile(analytic_profile_for(config));
  });

  py::class_<TrainConfig>(m, "TrainConfig")
      .def_static("defaults_for", &TrainConfig::defaults_for)
      .def_readwrite("iterations", &TrainConfig::iterations)
      .def_readwrite("trajectories_per_iteration",
                     &TrainConfig::trajectories_per_iteration)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("lr_decay_factor", &TrainConfig::lr_decay_factor)
      .def_readwrite("lr_decay_every", &TrainConfig::lr_decay_every)
      .def_readwrite("seed", &TrainConfig::seed)
      .def("lr_at", &TrainConfig::lr_at);

  py::class_<TrainingLogEntry>(m, "TrainingLogEntry")
      .def_readonly("iteration", &TrainingLogEntry::iteration)
      .def_readonly("agent", &TrainingLogEntry::agent)
      .def_readonly("mean_utility", &TrainingLogEntry::mean_utility)
      .def_readonly("lr", &TrainingLogEntry::lr);

  py::class_<LearnedProfile>(m, "LearnedProfile")
      .def_readonly("log", &LearnedProfile::log)
      .def("extract",
           [](const LearnedProfile& p) { return to_py_profile(p.extract()); });

  m.def(
      "train_selfplay",
      [](const MarketConfig& config, Algo algo, const TrainConfig& tc) {
        return train_selfplay(config, algo, tc);
      },
      py::arg("config"), py::arg("algo"), py::arg("train_config"),
      py::call_guard<py::gil_scoped_release>());

  py::class_<AgentVerification>(m, "AgentVerification")
      .def_readonly("current_value", &AgentVerification::current_value)
      .def_readonly("best_response_value",
                    &AgentVerification::best_response_value)
      .def_readonly("loss", &AgentVerification::loss)
      .def_readonly("normalized_loss", &AgentVerification::normalized_loss)
      .def_readonly("denominator_flag", &AgentVerification::denominator_flag)
      .def_readonly("nodes", &AgentVerification::nodes);

  py::class_<VerificationReport>(m, "VerificationReport")
      .def_readonly("agents", &VerificationReport::agents)
      .def_readonly("discretization", &VerificationReport::discretization)
      .def_readonly("epsilon", &VerificationReport::epsilon)
      .def("to_json", [](const VerificationReport& r) {
        return report_to_json(r).dump();
      });

  m.def("action_grid", &action_grid, py::arg("agent"), py::arg("k"),
        py::arg("config"));
  m.def(
      "best_response_value",
      [](const std::vector<std::shared_ptr<Policy>>& policies, int agent, int k,
         const MarketConfig& config) {
        StrategyProfile profile(policies.begin(), policies.end());
        std::uint64_t nodes = 0;
        const double value = best_response_value(profile, agent, k, config, &nodes);
        return py::make_tuple(value, nodes);
      },
      py::arg("profile"), py::arg("agent"), py::arg("k"), py::arg("config"));
  m.def(
      "verify_profile",
      [](const std::vector<std::shared_ptr<Policy>>& policies,
         const MarketConfig& config, int k, int workers,
         std::optional<int> mc_samples) {
        StrategyProfile profile(policies.begin(), policies.end());
        VerifyOptions options;
        options.discretization = k;
        options.workers = workers;
        options.mc_samples = mc_samples;
        return verify_profile(profile, options, config);
      },
      py::arg("profile"), py::arg("config"), py::arg("k") = 32,
      py::arg("workers") = 1, py::arg("mc_samples") = std::nullopt);

  py::class_<PredationRecord>(m, "PredationRecord")
      .def_readonly("agent", &PredationRecord::agent)
      .def_readonly("tau", &PredationRecord::tau)
      .def_readonly("sacrifice", &PredationRecord::sacrifice)
      .def_readonly("recoupment", &PredationRecord::recoupment)
      .def_readonly("pi", &PredationRecord::pi);

  m.def("predatory_incentive", &predatory_incentive, py::arg("pi_rewards"),
        py::arg("equ_rewards"), py::arg("tau") = std::nullopt);
  m.def("agent_rewards", &agent_rewards);
  m.def("first_opponent_exit", &first_opponent_exit);
  m.def("surplus", [](const StageOutcome& outcome) {
    const StageSurplus s = surplus(outcome);
    return py::make_tuple(s.producer, s.consumer);
  });

  py::class_<WelfareRecord>(m, "WelfareRecord")
      .def_readonly("producer_per_stage", &WelfareRecord::producer_per_stage)
      .def_readonly("consumer_per_stage", &WelfareRecord::consumer_per_stage)
      .def_readonly("producer_total", &WelfareRecord::producer_total)
      .def_readonly("consumer_total", &WelfareRecord::consumer_total)
      .def_readonly("welfare", &WelfareRecord::welfare)
      .def_readonly("d_producer", &WelfareRecord::d_producer)
      .def_readonly("d_consumer", &WelfareRecord::d_consumer)
      .def_readonly("d_welfare", &WelfareRecord::d_welfare);

  m.def("welfare_of", &welfare_of);
  m.def("welfare_difference", &welfare_difference);
  m.def("classify_regime", &classify_regime);
  m.def("aggregate_regime", &aggregate_regime);

  m.def("save_profile",
        [](const std::vector<std::shared_ptr<Policy>>& policies,
           const MarketConfig& config, const std::string& path) {
          StrategyProfile profile(policies.begin(), policies.end());
          save_profile(profile, config, path);
        });
  m.def("load_profile", [](const std::string& path, const MarketConfig& config) {
    return to_py_profile(load_profile(path, config));
  });
  m.def("load_config", &load_config);
  m.def("save_config", &save_config);
}
