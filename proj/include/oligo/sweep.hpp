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

#ifndef OLIGO_SWEEP_HPP_
#define OLIGO_SWEEP_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "oligo/io.hpp"
#include "oligo/learn.hpp"
#include "oligo/market.hpp"
#include "oligo/metrics.hpp"
#include "oligo/verify.hpp"

namespace oligo {

// The cost-sweep experiment: firm 0's unit cost walks a grid while firms 1
// and 2 stay at 0.8; every (cost, seed, algorithm, information) combination
// is one training cell.
struct SweepSpec {
  int cost_steps = 60;
  double c0_min = 0.42;
  double c0_max = 0.95;
  std::vector<int> cost_indices;  // empty means the full grid
  std::vector<int> seeds = {0, 1, 2, 3, 4};
  std::vector<Algo> algorithms = {Algo::kPpo, Algo::kReinforce};
  std::vector<Information> informations = {Information::kFullyObservable,
                                           Information::kPartiallyObservable};
  int verifier_k = 32;
  int iterations = 1000;
  int trajectories_per_iteration = 20000;
  std::uint64_t base_seed = 0;

  double c0_at(int index) const;

  // Evenly spaced cost indices including both grid endpoints.
  static std::vector<int> thinned_indices(int points, int cost_steps = 60);
};

struct SweepCell {
  int cost_index = 0;
  double c0 = 0.0;
  Algo algo = Algo::kPpo;
  Information information = Information::kFullyObservable;
  int seed_index = 0;
  std::uint64_t train_seed = 0;
  std::string key;
};

std::vector<SweepCell> sweep_cells(const SweepSpec& spec);

struct ResultRow {
  double c0 = 0.0;
  std::string algo;
  std::string information;
  int seed = 0;
  std::string regime;
  double pi0 = 0.0, pi1 = 0.0, pi2 = 0.0;
  double ps = 0.0, cs = 0.0, w = 0.0;
  double dps = 0.0, dcs = 0.0, dw = 0.0;
  double epsilon = 0.0;
  double loss_agent0 = 0.0;
  double loss_agents12 = 0.0;
};

void write_results_header(std::ostream& out);
void write_result_row(const ResultRow& row, std::ostream& out);
std::vector<ResultRow> read_results_csv(const std::string& path);

struct CellEvaluation {
  ResultRow row;
  MarketConfig config;
  StrategyProfile extracted;
  Trajectory trajectory;
  VerificationReport report;
};

// Train, extract, verify, roll out and score one cell against the matching
// no-dropout analytic baseline.
CellEvaluation evaluate_cell(const SweepCell& cell, const SweepSpec& spec);

struct SweepOptions {
  int workers = 1;
  bool resume = true;            // skip cells already present in results.csv
  bool save_cell_artifacts = true;
  std::ostream* progress = nullptr;
};

struct SweepOutcome {
  std::vector<ResultRow> rows;          // all rows, including resumed ones
  std::vector<std::string> failures;    // cell key + reason
};

// Runs every cell, appending one CSV row per finished cell to
// out_dir/results.csv; cell failures are recorded and the sweep continues.
SweepOutcome run_sweep(const SweepSpec& spec, const std::string& out_dir,
                       const SweepOptions& options = {});

// Per-agent predatory-incentive curves and the surplus/welfare delta curves,
// mean line with a +/- one-standard-deviation band per (algorithm,
// information) pair and a majority-vote regime strip.
void emit_figures(const std::vector<ResultRow>& rows,
                  const std::string& out_dir);

// Price paths of one trajectory, lines truncated at exit.
void emit_strategy_figure(const TrajectoryTable& table,
                          const std::string& path, const std::string& title);

}  // namespace oligo

#endif  // OLIGO_SWEEP_HPP_
