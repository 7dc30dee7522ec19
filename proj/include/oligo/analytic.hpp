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

#ifndef OLIGO_ANALYTIC_HPP_
#define OLIGO_ANALYTIC_HPP_

#include <Eigen/Dense>
#include <vector>

#include "oligo/market.hpp"
#include "oligo/profiles.hpp"

namespace oligo {

// Open price sequences forming the no-dropout equilibrium under partial
// information. prices and demands are horizon x n_agents.
struct OpenLoopEquilibrium {
  Eigen::MatrixXd prices;
  Eigen::MatrixXd demands;
  double residual_norm = 0.0;
};

// Coefficients of the fully observable no-dropout equilibrium,
// p_i(t, D) = lambda1(t, i) + lambda2(t, i) * D_t^i.
struct LinearFeedbackEquilibrium {
  Eigen::MatrixXd lambda1;
  Eigen::MatrixXd lambda2;
};

// Demand paths implied by a full price matrix under the inertia update,
// ignoring dropouts. Row t holds the stage-(t+1) intercepts.
Eigen::MatrixXd propagate_demands(const Eigen::MatrixXd& prices,
                                  const MarketConfig& config);

// Stationarity defect of each firm's cumulative profit in its stage-t price:
// (D_t^i - 2 p_t^i + c_i) - (N-1)/N * sum_{tau>t} (p_tau^i - c_i),
// flattened row-major over (t, i).
Eigen::VectorXd foc_residuals(const Eigen::MatrixXd& prices,
                              const MarketConfig& config);

struct OpenLoopSolveOptions {
  int max_iterations = 50;
  double tolerance = 1e-12;      // Newton stop on residual infinity norm
  double required_norm = 1e-10;  // convergence contract of the result
};

// Newton iteration on the joint stationarity/demand system from the
// stage-wise monopoly guess p = (D_1 + c)/2. Box constraints are checked
// after the solve; violations surface as Error(kConstraintViolated).
OpenLoopEquilibrium solve_open_loop_ne(const MarketConfig& config,
                                       const OpenLoopSolveOptions& options = {});

// Multistart variant: Newton from `starts` random feasible price matrices,
// returning the distinct solutions (pairwise infinity-distance > 1e-6).
std::vector<OpenLoopEquilibrium> solve_open_loop_ne_multistart(
    const MarketConfig& config, int starts, std::uint64_t seed);

// Box-constrained equilibrium via an active set on the price box. Strongly
// asymmetric costs push the stationary point outside [c_i, p_max] (a firm
// would price below cost for market share), where the equilibrium instead
// satisfies per-entry complementarity: free entries are stationary, clamped
// entries carry the right derivative sign. Coincides with solve_open_loop_ne
// whenever the interior solution is feasible. residual_norm reports the free
// entries' stationarity defect.
OpenLoopEquilibrium solve_open_loop_ne_kkt(const MarketConfig& config);

struct SecondOrderReport {
  // Ascending eigenvalues of each firm's own-price Hessian of total profit.
  std::vector<Eigen::VectorXd> eigenvalues;
  bool all_negative = false;
  double fd_step = 1e-5;
};

// Central finite-difference Hessian of each firm's utility in its own price
// path, opponents fixed; a maximum needs every eigenvalue < 0.
SecondOrderReport check_second_order(const MarketConfig& config,
                                     const Eigen::MatrixXd& prices,
                                     double fd_step = 1e-5);

// Backward induction with continuation values quadratic in own demand (exact
// here because the inertia update conserves the total intercept). The result
// is certified externally through the verifier, not assumed.
LinearFeedbackEquilibrium solve_feedback_ne(const MarketConfig& config);

// Policy adapters.
StrategyProfile open_loop_profile(const OpenLoopEquilibrium& eq);
StrategyProfile feedback_profile(const LinearFeedbackEquilibrium& eq,
                                 const MarketConfig& config);

// Equilibrium profile matching the config's information setting, solved on
// the no-dropout twin of `config`; the baseline for predation metrics.
StrategyProfile analytic_profile_for(const MarketConfig& config);

}  // namespace oligo

#endif  // OLIGO_ANALYTIC_HPP_
