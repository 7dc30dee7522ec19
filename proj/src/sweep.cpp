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

#include "oligo/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "oligo/analytic.hpp"
#include "oligo/svg.hpp"

namespace oligo {

namespace fs = std::filesystem;

double SweepSpec::c0_at(int index) const {
  return c0_min + (c0_max - c0_min) * index / (cost_steps - 1);
}

std::vector<int> SweepSpec::thinned_indices(int points, int cost_steps) {
  std::vector<int> indices;
  for (int k = 0; k < points; ++k) {
    const double pos = static_cast<double>(k) * (cost_steps - 1) / (points - 1);
    indices.push_back(static_cast<int>(std::lround(pos)));
  }
  return indices;
}

std::vector<SweepCell> sweep_cells(const SweepSpec& spec) {
  std::vector<int> costs = spec.cost_indices;
  if (costs.empty()) {
    costs.resize(spec.cost_steps);
    for (int i = 0; i < spec.cost_steps; ++i) costs[i] = i;
  }
  std::vector<SweepCell> cells;
  for (int cost_index : costs) {
    for (Algo algo : spec.algorithms) {
      for (Information info : spec.informations) {
        for (int seed : spec.seeds) {
          SweepCell cell;
          cell.cost_index = cost_index;
          cell.c0 = spec.c0_at(cost_index);
          cell.algo = algo;
          cell.information = info;
          cell.seed_index = seed;
          cell.train_seed = mix_seed(
              spec.base_seed, static_cast<std::uint64_t>(cost_index),
              algo == Algo::kPpo ? 1u : 2u,
              info == Information::kFullyObservable ? 1u : 2u,
              static_cast<std::uint64_t>(seed));
          std::ostringstream key;
          key << 'c' << cost_index << '_' << algo_name(algo) << '_'
              << information_name(info) << "_s" << seed;
          cell.key = key.str();
          cells.push_back(std::move(cell));
        }
      }
    }
  }
  return cells;
}

namespace {

constexpr const char* kResultsSchema = "# oligo-results-v1";
constexpr const char* kResultsHeader =
    "c0,algo,information,seed,regime,PI_0,PI_1,PI_2,PS,CS,W,dPS,dCS,dW,"
    "epsilon,loss_agent0,loss_agents12";

std::string row_key(const ResultRow& row) {
  return format_double(row.c0) + "|" + row.algo + "|" + row.information + "|" +
         std::to_string(row.seed);
}

}  // namespace

void write_results_header(std::ostream& out) {
  out << kResultsSchema << '\n' << kResultsHeader << '\n';
}

void write_result_row(const ResultRow& row, std::ostream& out) {
  out << format_double(row.c0) << ',' << row.algo << ',' << row.information
      << ',' << row.seed << ',' << row.regime << ',' << format_double(row.pi0)
      << ',' << format_double(row.pi1) << ',' << format_double(row.pi2) << ','
      << format_double(row.ps) << ',' << format_double(row.cs) << ','
      << format_double(row.w) << ',' << format_double(row.dps) << ','
      << format_double(row.dcs) << ',' << format_double(row.dw) << ','
      << format_double(row.epsilon) << ',' << format_double(row.loss_agent0)
      << ',' << format_double(row.loss_agents12) << '\n';
}

std::vector<ResultRow> read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read '" + path + "'");
  std::vector<ResultRow> rows;
  std::string line;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!saw_header) {
      if (line != kResultsHeader) {
        throw Error(ErrorCode::kMissingColumns,
                    "unexpected results header in '" + path + "'");
      }
      saw_header = true;
      continue;
    }
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 17) {
      throw Error(ErrorCode::kMissingColumns, "short results row");
    }
    ResultRow row;
    row.c0 = parse_double(fields[0]);
    row.algo = fields[1];
    row.information = fields[2];
    row.seed = std::stoi(fields[3]);
    row.regime = fields[4];
    row.pi0 = parse_double(fields[5]);
    row.pi1 = parse_double(fields[6]);
    row.pi2 = parse_double(fields[7]);
    row.ps = parse_double(fields[8]);
    row.cs = parse_double(fields[9]);
    row.w = parse_double(fields[10]);
    row.dps = parse_double(fields[11]);
    row.dcs = parse_double(fields[12]);
    row.dw = parse_double(fields[13]);
    row.epsilon = parse_double(fields[14]);
    row.loss_agent0 = parse_double(fields[15]);
    row.loss_agents12 = parse_double(fields[16]);
    rows.push_back(std::move(row));
  }
  return rows;
}

CellEvaluation evaluate_cell(const SweepCell& cell, const SweepSpec& spec) {
  CellEvaluation eval;
  eval.config = experiment_config(cell.c0, /*dropouts_enabled=*/true,
                                  cell.information);

  TrainConfig tc = TrainConfig::defaults_for(cell.algo);
  tc.iterations = spec.iterations;
  tc.trajectories_per_iteration = spec.trajectories_per_iteration;
  tc.seed = cell.train_seed;

  const LearnedProfile learned = train_selfplay(eval.config, cell.algo, tc);
  eval.extracted = learned.extract();
  eval.report = verify_profile(eval.extracted, spec.verifier_k, eval.config);

  RolloutOptions rollout_options;
  rollout_options.on_all_exit = AllExitHandling::kDegenerate;
  eval.trajectory = rollout(eval.extracted, eval.config, rollout_options);

  MarketConfig baseline_config = eval.config;
  baseline_config.dropouts_enabled = false;
  const StrategyProfile baseline_profile = analytic_profile_for(eval.config);
  const Trajectory baseline = rollout(baseline_profile, baseline_config);

  const WelfareRecord welfare = welfare_difference(eval.trajectory, baseline);

  ResultRow& row = eval.row;
  row.c0 = cell.c0;
  row.algo = algo_name(cell.algo);
  row.information = information_name(cell.information);
  row.seed = cell.seed_index;
  row.regime = regime_name(classify_regime(eval.trajectory));

  double pi[3];
  for (int i = 0; i < 3; ++i) {
    const PredationRecord record = predatory_incentive(
        agent_rewards(eval.trajectory, i), agent_rewards(baseline, i),
        first_opponent_exit(eval.trajectory, i));
    pi[i] = record.pi;
  }
  row.pi0 = pi[0];
  row.pi1 = pi[1];
  row.pi2 = pi[2];
  row.ps = welfare.producer_total;
  row.cs = welfare.consumer_total;
  row.w = welfare.welfare;
  row.dps = welfare.d_producer;
  row.dcs = welfare.d_consumer;
  row.dw = welfare.d_welfare;
  row.epsilon = eval.report.epsilon;
  row.loss_agent0 = eval.report.agents[0].loss;
  row.loss_agents12 =
      std::max(eval.report.agents[1].loss, eval.report.agents[2].loss);
  return eval;
}

SweepOutcome run_sweep(const SweepSpec& spec, const std::string& out_dir,
                       const SweepOptions& options) {
  fs::create_directories(out_dir);
  const std::string results_path = out_dir + "/results.csv";

  SweepOutcome outcome;
  std::set<std::string> done;
  if (options.resume && fs::exists(results_path)) {
    outcome.rows = read_results_csv(results_path);
    for (const ResultRow& row : outcome.rows) done.insert(row_key(row));
  }

  std::vector<SweepCell> cells = sweep_cells(spec);
  std::vector<SweepCell> pending;
  for (SweepCell& cell : cells) {
    ResultRow probe;
    probe.c0 = cell.c0;
    probe.algo = algo_name(cell.algo);
    probe.information = information_name(cell.information);
    probe.seed = cell.seed_index;
    if (!done.count(row_key(probe))) pending.push_back(std::move(cell));
  }

  std::ofstream results(results_path, std::ios::app);
  if (!results) throw Error(ErrorCode::kIo, "cannot write " + results_path);
  if (done.empty() && outcome.rows.empty()) write_results_header(results);

  std::mutex sink;
  std::atomic<std::size_t> cursor{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t k = cursor.fetch_add(1);
      if (k >= pending.size()) return;
      const SweepCell& cell = pending[k];
      try {
        CellEvaluation eval = evaluate_cell(cell, spec);
        std::lock_guard<std::mutex> lock(sink);
        write_result_row(eval.row, results);
        results.flush();
        outcome.rows.push_back(eval.row);
        if (options.save_cell_artifacts) {
          const std::string cell_dir = out_dir + "/cells/" + cell.key;
          fs::create_directories(cell_dir);
          save_profile(eval.extracted, eval.config, cell_dir + "/profile.json");
          save_trajectory_csv(eval.trajectory, cell_dir + "/trajectory.csv");
          std::ofstream report(cell_dir + "/report.csv");
          write_report_csv(eval.report, report);
        }
        if (options.progress) {
          *options.progress << "cell " << cell.key << " done, regime "
                            << eval.row.regime << ", eps "
                            << eval.row.epsilon << "\n";
          options.progress->flush();
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(sink);
        outcome.failures.push_back(cell.key + ": " + e.what());
        std::ofstream failures(out_dir + "/failures.log", std::ios::app);
        failures << cell.key << ',' << e.what() << '\n';
        if (options.progress) {
          *options.progress << "cell " << cell.key << " FAILED: " << e.what()
                            << "\n";
        }
      }
    }
  };

  const int workers = std::max(1, options.workers);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return outcome;
}

namespace {

std::string regime_color(const std::string& regime) {
  if (regime == "dominance") return "#6a51a3";
  if (regime == "predation") return "#d94801";
  if (regime == "competition") return "#2ca25f";
  if (regime == "marginalization") return "#08519c";
  return "#969696";
}

std::string combo_color(const std::string& algo, const std::string& info) {
  if (algo == "ppo" && info == "full") return "#1f77b4";
  if (algo == "ppo" && info == "partial") return "#ff7f0e";
  if (algo == "reinforce" && info == "full") return "#2ca02c";
  return "#d62728";
}

// Majority regime per cost point, over seeds, algorithms and settings.
std::vector<svg::Strip> regime_strips(const std::vector<ResultRow>& rows) {
  std::map<double, std::vector<RegimeLabel>> by_cost;
  for (const ResultRow& row : rows) {
    by_cost[row.c0].push_back(regime_from_name(row.regime));
  }
  std::vector<double> costs;
  for (const auto& [c0, labels] : by_cost) costs.push_back(c0);
  std::vector<svg::Strip> strips;
  for (std::size_t k = 0; k < costs.size(); ++k) {
    const double lo =
        k == 0 ? costs[k] : 0.5 * (costs[k - 1] + costs[k]);
    const double hi =
        k + 1 == costs.size() ? costs[k] : 0.5 * (costs[k] + costs[k + 1]);
    const RegimeLabel majority = aggregate_regime(by_cost[costs[k]]);
    strips.push_back({lo, hi, regime_color(regime_name(majority)),
                      regime_name(majority)});
  }
  return strips;
}

void emit_metric_figure(const std::vector<ResultRow>& rows,
                        double ResultRow::*field, const std::string& title,
                        const std::string& y_label, const std::string& path) {
  // (algo, information) -> c0 -> seed values
  std::map<std::pair<std::string, std::string>,
           std::map<double, std::vector<double>>>
      grouped;
  for (const ResultRow& row : rows) {
    grouped[{row.algo, row.information}][row.c0].push_back(row.*field);
  }
  svg::Plot plot;
  plot.title = title;
  plot.x_label = "c0";
  plot.y_label = y_label;
  plot.strips = regime_strips(rows);
  for (const auto& [combo, by_cost] : grouped) {
    svg::Series series;
    series.color = combo_color(combo.first, combo.second);
    series.label = combo.first + " / " + combo.second;
    for (const auto& [c0, values] : by_cost) {
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= values.size();
      double var = 0.0;
      for (double v : values) var += (v - mean) * (v - mean);
      const double stddev =
          values.size() > 1 ? std::sqrt(var / (values.size() - 1)) : 0.0;
      series.x.push_back(c0);
      series.y.push_back(mean);
      series.band_lo.push_back(mean - stddev);
      series.band_hi.push_back(mean + stddev);
    }
    plot.series.push_back(std::move(series));
  }
  svg::write_plot(plot, path);
}

}  // namespace

void emit_figures(const std::vector<ResultRow>& rows,
                  const std::string& out_dir) {
  if (rows.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no result rows to plot");
  }
  fs::create_directories(out_dir);
  emit_metric_figure(rows, &ResultRow::pi0, "Predatory incentive, agent 0",
                     "PI_0", out_dir + "/pi_agent0.svg");
  emit_metric_figure(rows, &ResultRow::pi1, "Predatory incentive, agent 1",
                     "PI_1", out_dir + "/pi_agent1.svg");
  emit_metric_figure(rows, &ResultRow::pi2, "Predatory incentive, agent 2",
                     "PI_2", out_dir + "/pi_agent2.svg");
  emit_metric_figure(rows, &ResultRow::dps, "Producer surplus difference",
                     "dPS", out_dir + "/welfare_dps.svg");
  emit_metric_figure(rows, &ResultRow::dcs, "Consumer surplus difference",
                     "dCS", out_dir + "/welfare_dcs.svg");
  emit_metric_figure(rows, &ResultRow::dw, "Welfare difference", "dW",
                     out_dir + "/welfare_dw.svg");
}

void emit_strategy_figure(const TrajectoryTable& table, const std::string& path,
                          const std::string& title) {
  static const char* kAgentColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c",
                                       "#d62728", "#9467bd", "#8c564b"};
  svg::Plot plot;
  plot.title = title;
  plot.x_label = "stage";
  plot.y_label = "price";
  for (int i = 0; i < table.n_agents; ++i) {
    svg::Series series;
    series.color = kAgentColors[i % 6];
    series.label = "agent " + std::to_string(i);
    for (int t = 0; t < table.horizon; ++t) {
      if (!table.active[t][i]) break;  // the line stops at the exit round
      series.x.push_back(t + 1);
      series.y.push_back(table.prices[t][i]);
    }
    plot.series.push_back(std::move(series));
  }
  svg::write_plot(plot, path);
}

}  // namespace oligo
