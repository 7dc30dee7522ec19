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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "oligo/analytic.hpp"
#include "oligo/io.hpp"
#include "oligo/learn.hpp"
#include "oligo/market.hpp"
#include "oligo/metrics.hpp"
#include "oligo/sweep.hpp"
#include "oligo/verify.hpp"

namespace fs = std::filesystem;
using namespace oligo;

namespace {

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kConfigInvalid:
    case ErrorCode::kConfigMismatch:
    case ErrorCode::kMissingColumns:
    case ErrorCode::kIo:
      return 2;
    default:
      return 1;
  }
}

void print_price_paths(const MarketConfig& config, const Trajectory& traj) {
  for (int i = 0; i < config.n_agents; ++i) {
    std::printf("agent %d prices:", i);
    for (std::size_t t = 0; t < traj.outcomes.size(); ++t) {
      if (!traj.states[t].active[i]) break;  // stop at the exit round
      std::printf(" %.6f", traj.outcomes[t].prices[i]);
    }
    std::printf("\n");
  }
}

int cmd_simulate(const std::string& config_path, const std::string& profile_path,
                 std::uint64_t seed, bool has_seed, const std::string& out_dir) {
  MarketConfig config = load_config(config_path);
  StrategyProfile profile;
  if (!profile_path.empty()) {
    profile = load_profile(profile_path, config);
  } else {
    profile = analytic_profile_for(config);  // equilibrium of the no-dropout twin
  }
  RolloutOptions options;
  options.on_all_exit = AllExitHandling::kDegenerate;
  if (has_seed) options.seed = seed;
  const Trajectory traj = rollout(profile, config, options);
  fs::create_directories(out_dir);
  save_trajectory_csv(traj, out_dir + "/trajectory.csv");
  print_price_paths(config, traj);
  for (int i = 0; i < config.n_agents; ++i) {
    std::printf("agent %d utility: %.6f\n", i, traj.utilities[i]);
  }
  std::printf("wrote %s/trajectory.csv\n", out_dir.c_str());
  return 0;
}

int cmd_solve_analytic(const std::string& config_path,
                       const std::string& out_dir) {
  MarketConfig config = load_config(config_path);
  MarketConfig no_dropout = config;
  no_dropout.dropouts_enabled = false;
  fs::create_directories(out_dir);

  StrategyProfile profile;
  if (config.information == Information::kPartiallyObservable) {
    OpenLoopEquilibrium eq;
    try {
      eq = solve_open_loop_ne(no_dropout);
      std::printf("open-loop equilibrium, residual norm %.3g\n",
                  eq.residual_norm);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kConstraintViolated) throw;
      eq = solve_open_loop_ne_kkt(no_dropout);
      std::printf("interior solution infeasible; boundary equilibrium with "
                  "free-entry residual %.3g\n",
                  eq.residual_norm);
    }
    profile = open_loop_profile(eq);
  } else {
    const LinearFeedbackEquilibrium eq = solve_feedback_ne(no_dropout);
    profile = feedback_profile(eq, no_dropout);
    std::ofstream coeffs(out_dir + "/coefficients.csv");
    write_coefficients_csv(eq, coeffs);
    std::printf("feedback equilibrium, coefficients in %s/coefficients.csv\n",
                out_dir.c_str());
  }
  const Trajectory traj = rollout(profile, no_dropout);
  print_price_paths(no_dropout, traj);
  save_trajectory_csv(traj, out_dir + "/equilibrium.csv");
  save_profile(profile, config, out_dir + "/profile.json");
  std::printf("wrote %s/profile.json and %s/equilibrium.csv\n", out_dir.c_str(),
              out_dir.c_str());
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& algo_str,
              std::uint64_t seed, int iterations, int trajectories,
              const std::string& out_dir, bool quiet) {
  MarketConfig config = load_config(config_path);
  const Algo algo = algo_from_name(algo_str);
  TrainConfig tc = TrainConfig::defaults_for(algo);
  if (iterations > 0) tc.iterations = iterations;
  if (trajectories > 0) tc.trajectories_per_iteration = trajectories;
  tc.seed = seed;

  struct Progress {
    bool quiet;
  } progress{quiet};
  TrainCallbacks callbacks;
  callbacks.ctx = &progress;
  callbacks.on_iteration = [](void* ctx,
                              const std::vector<TrainingLogEntry>& entries) {
    auto* p = static_cast<Progress*>(ctx);
    if (p->quiet || entries.empty()) return;
    if (entries.front().iteration % 25 != 0) return;
    std::printf("iter %4d lr %.2e utilities:", entries.front().iteration,
                entries.front().lr);
    for (const auto& e : entries) std::printf(" %.5f", e.mean_utility);
    std::printf("\n");
    std::fflush(stdout);
  };

  const LearnedProfile learned = train_selfplay(config, algo, tc, {}, callbacks);
  fs::create_directories(out_dir);
  save_profile(learned.extract(), config, out_dir + "/profile.json");
  std::ofstream log(out_dir + "/training_log.csv");
  write_training_log_csv(learned.log, log);
  std::printf("wrote %s/profile.json and %s/training_log.csv\n",
              out_dir.c_str(), out_dir.c_str());
  return 0;
}

int cmd_verify(const std::string& config_path, const std::string& profile_path,
               int k, int workers, int mc_samples, const std::string& out_dir) {
  MarketConfig config = load_config(config_path);
  const StrategyProfile profile = load_profile(profile_path, config);
  VerifyOptions options;
  options.discretization = k;
  options.workers = workers;
  if (mc_samples > 0) options.mc_samples = mc_samples;
  const VerificationReport report = verify_profile(profile, options, config);
  for (std::size_t i = 0; i < report.agents.size(); ++i) {
    const AgentVerification& a = report.agents[i];
    std::printf("agent %zu: current %.6f br %.6f loss %.6f norm %.4f%s\n", i,
                a.current_value, a.best_response_value, a.loss,
                a.normalized_loss, a.denominator_flag ? " [small denominator]" : "");
  }
  std::printf("epsilon: %.6f (K=%d)\n", report.epsilon, report.discretization);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream csv(out_dir + "/report.csv");
    write_report_csv(report, csv);
    write_text_file(out_dir + "/report.json", report_to_json(report).dump(2) + "\n");
    std::printf("wrote %s/report.csv and %s/report.json\n", out_dir.c_str(),
                out_dir.c_str());
  }
  return 0;
}

int cmd_sweep(const std::string& out_dir, int workers, std::uint64_t seed,
              int thin, int iterations, int trajectories, int k, bool no_resume,
              bool figures) {
  SweepSpec spec;
  spec.base_seed = seed;
  if (thin > 0) spec.cost_indices = SweepSpec::thinned_indices(thin);
  if (iterations > 0) spec.iterations = iterations;
  if (trajectories > 0) spec.trajectories_per_iteration = trajectories;
  if (k > 0) spec.verifier_k = k;

  SweepOptions options;
  options.workers = workers;
  options.resume = !no_resume;
  options.progress = &std::cout;
  const SweepOutcome outcome = run_sweep(spec, out_dir, options);
  std::printf("sweep finished: %zu rows, %zu failures\n", outcome.rows.size(),
              outcome.failures.size());
  if (figures && !outcome.rows.empty()) {
    emit_figures(outcome.rows, out_dir + "/figures");
    std::printf("wrote figures to %s/figures\n", out_dir.c_str());
  }
  return outcome.failures.empty() ? 0 : 1;
}

int cmd_plot(const std::string& results_path, const std::string& traj_path,
             const std::string& out_dir) {
  fs::create_directories(out_dir);
  if (!results_path.empty()) {
    const std::vector<ResultRow> rows = read_results_csv(results_path);
    emit_figures(rows, out_dir);
    std::printf("wrote sweep figures to %s\n", out_dir.c_str());
  }
  if (!traj_path.empty()) {
    const TrajectoryTable table = read_trajectory_csv(traj_path);
    emit_strategy_figure(table, out_dir + "/strategy_profile.svg",
                         "Strategy profile");
    std::printf("wrote %s/strategy_profile.svg\n", out_dir.c_str());
  }
  if (results_path.empty() && traj_path.empty()) {
    throw Error(ErrorCode::kConfigInvalid,
                "plot needs --results and/or --traj");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynamic oligopoly toolkit: simulation, analytic equilibria, "
               "self-play learning, brute-force verification, predation "
               "metrics"};
  app.require_subcommand(1);

  std::string config_path, profile_path, out_dir = "out", results_path,
              traj_path, algo_str = "ppo";
  std::uint64_t seed = 0;
  int k = 32, workers = 1, iterations = 0, trajectories = 0, thin = 0,
      mc_samples = 0;
  bool no_resume = false, figures = false, quiet = false;

  auto* simulate = app.add_subcommand("simulate",
                                      "roll a profile out to a trajectory CSV");
  simulate->add_option("--config", config_path, "market config JSON")->required();
  simulate->add_option("--profile", profile_path,
                       "profile JSON (default: analytic equilibrium)");
  auto* seed_opt = simulate->add_option("--seed", seed, "rollout seed");
  simulate->add_option("--out", out_dir, "output directory");

  auto* solve = app.add_subcommand("solve-analytic",
                                   "no-dropout equilibrium for the config's "
                                   "information setting");
  solve->add_option("--config", config_path, "market config JSON")->required();
  solve->add_option("--out", out_dir, "output directory");

  auto* train = app.add_subcommand("train", "self-play policy gradients");
  train->add_option("--config", config_path, "market config JSON")->required();
  train->add_option("--algo", algo_str, "ppo or reinforce")
      ->check(CLI::IsMember({"ppo", "reinforce"}));
  train->add_option("--seed", seed, "training seed");
  train->add_option("--iterations", iterations, "override iteration count");
  train->add_option("--trajectories", trajectories,
                    "override trajectories per iteration");
  train->add_option("--out", out_dir, "output directory");
  train->add_flag("--quiet", quiet, "suppress progress lines");

  auto* verify = app.add_subcommand("verify",
                                    "brute-force best-response verification");
  verify->add_option("--config", config_path, "market config JSON")->required();
  verify->add_option("--profile", profile_path, "profile JSON")->required();
  verify->add_option("--k", k, "action discretization (default 32)");
  verify->add_option("--workers", workers, "first-stage subtree threads");
  verify->add_option("--mc-samples", mc_samples,
                     "Monte Carlo realizations for stochastic profiles");
  verify->add_option("--out", out_dir, "output directory for the report");

  auto* sweep = app.add_subcommand("sweep", "cost sweep over training cells");
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--workers", workers, "parallel cells");
  sweep->add_option("--seed", seed, "base seed");
  sweep->add_option("--thin", thin, "use this many cost points instead of 60");
  sweep->add_option("--iterations", iterations, "override iteration count");
  sweep->add_option("--trajectories", trajectories,
                    "override trajectories per iteration");
  sweep->add_option("--k", k, "verifier discretization");
  sweep->add_flag("--no-resume", no_resume, "recompute finished cells too");
  sweep->add_flag("--figures", figures, "emit figures after the sweep");

  auto* plot = app.add_subcommand("plot", "figures from sweep results");
  plot->add_option("--results", results_path, "results.csv from a sweep");
  plot->add_option("--traj", traj_path, "trajectory CSV for a strategy plot");
  plot->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (simulate->parsed()) {
      return cmd_simulate(config_path, profile_path, seed,
                          seed_opt->count() > 0, out_dir);
    }
    if (solve->parsed()) return cmd_solve_analytic(config_path, out_dir);
    if (train->parsed()) {
      return cmd_train(config_path, algo_str, seed, iterations, trajectories,
                       out_dir, quiet);
    }
    if (verify->parsed()) {
      return cmd_verify(config_path, profile_path, k, workers, mc_samples,
                        out_dir);
    }
    if (sweep->parsed()) {
      return cmd_sweep(out_dir, workers, seed, thin, iterations, trajectories,
                       k, no_resume, figures);
    }
    if (plot->parsed()) return cmd_plot(results_path, traj_path, out_dir);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: internal: %s\n", e.what());
    return 1;
  }
  return 2;
}
