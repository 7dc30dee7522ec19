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

#include "oligo/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oligo/rng.hpp"

namespace oligo {

namespace {

void require_no_dropouts(const MarketConfig& config, const char* what) {
  if (config.dropouts_enabled) {
    throw Error(ErrorCode::kConfigInvalid,
                std::string(what) + " is defined for the no-dropout game only");
  }
}

// Total profit of firm `agent` under fixed open price paths, no dropouts and
// no box checks; pure quadratic used by the Hessian probe.
double open_path_utility(const Eigen::MatrixXd& prices,
                         const MarketConfig& config, int agent) {
  const int horizon = config.horizon;
  const int n = config.n_agents;
  Eigen::VectorXd demand =
      Eigen::Map<const Eigen::VectorXd>(config.initial_demands.data(), n);
  double utility = 0.0;
  for (int t = 0; t < horizon; ++t) {
    utility += (prices(t, agent) - config.unit_costs[agent]) *
               (demand(agent) - prices(t, agent));
    const double mean = prices.row(t).mean();
    demand += Eigen::VectorXd::Constant(n, mean) - prices.row(t).transpose();
  }
  return utility;
}

}  // namespace

Eigen::MatrixXd propagate_demands(const Eigen::MatrixXd& prices,
                                  const MarketConfig& config) {
  const int horizon = config.horizon;
  const int n = config.n_agents;
  Eigen::MatrixXd demands(horizon, n);
  demands.row(0) =
      Eigen::Map<const Eigen::VectorXd>(config.initial_demands.data(), n);
  for (int t = 0; t + 1 < horizon; ++t) {
    const double mean = prices.row(t).mean();
    demands.row(t + 1) =
        demands.row(t) - prices.row(t) + Eigen::RowVectorXd::Constant(n, mean);
  }
  return demands;
}

Eigen::VectorXd foc_residuals(const Eigen::MatrixXd& prices,
                              const MarketConfig& config) {
  require_no_dropouts(config, "foc_residuals");
  const int horizon = config.horizon;
  const int n = config.n_agents;
  const double coupling = static_cast<double>(n - 1) / n;
  const Eigen::MatrixXd demands = propagate_demands(prices, config);

  Eigen::VectorXd residuals(horizon * n);
  for (int i = 0; i < n; ++i) {
    double future_margin = 0.0;  // sum_{tau>t} (p_tau - c)
    for (int t = horizon - 1; t >= 0; --t) {
      residuals(t * n + i) = demands(t, i) - 2.0 * prices(t, i) +
                             config.unit_costs[i] - coupling * future_margin;
      future_margin += prices(t, i) - config.unit_costs[i];
    }
  }
  return residuals;
}

namespace {

Eigen::MatrixXd foc_jacobian(const MarketConfig& config) {
  const int horizon = config.horizon;
  const int n = config.n_agents;
  const double coupling = static_cast<double>(n - 1) / n;
  Eigen::MatrixXd jac(horizon * n, horizon * n);
  for (int t = 0; t < horizon; ++t) {
    for (int i = 0; i < n; ++i) {
      for (int tau = 0; tau < horizon; ++tau) {
        for (int j = 0; j < n; ++j) {
          double v = 0.0;
          if (tau == t) {
            v = (i == j) ? -2.0 : 0.0;
          } else if (tau > t) {
            v = (i == j) ? -coupling : 0.0;
          } else {  // earlier prices act through the demand path
            v = 1.0 / n - (i == j ? 1.0 : 0.0);
          }
          jac(t * n + i, tau * n + j) = v;
        }
      }
    }
  }
  return jac;
}

OpenLoopEquilibrium newton_from(const Eigen::MatrixXd& start,
                                const MarketConfig& config,
                                const OpenLoopSolveOptions& options) {
  const int horizon = config.horizon;
  const int n = config.n_agents;
  Eigen::MatrixXd prices = start;
  const Eigen::MatrixXd jac = foc_jacobian(config);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);

  double norm = 0.0;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    const Eigen::VectorXd residual = foc_residuals(prices, config);
    norm = residual.lpNorm<Eigen::Infinity>();
    if (norm <= options.tolerance) break;
    const Eigen::VectorXd delta = lu.solve(residual);
    for (int t = 0; t < horizon; ++t) {
      for (int i = 0; i < n; ++i) {
        prices(t, i) -= delta(t * n + i);
      }
    }
  }
  if (norm > options.required_norm) {
    throw Error(ErrorCode::kNoConvergence,
                "Newton residual " + std::to_string(norm) + " after " +
                    std::to_string(iter) + " iterations");
  }

  OpenLoopEquilibrium eq;
  eq.prices = prices;
  eq.demands = propagate_demands(prices, config);
  eq.residual_norm = norm;

  constexpr double kSlack = 1e-12;
  for (int t = 0; t < horizon; ++t) {
    for (int i = 0; i < n; ++i) {
      if (eq.demands(t, i) < -kSlack) {
        throw Error(ErrorCode::kConstraintViolated,
                    "demand of agent " + std::to_string(i) + " at stage " +
                        std::to_string(t + 1) + " is negative");
      }
      if (prices(t, i) < config.unit_costs[i] - kSlack ||
          prices(t, i) >= config.p_max) {
        throw Error(ErrorCode::kConstraintViolated,
                    "price of agent " + std::to_string(i) + " at stage " +
                        std::to_string(t + 1) + " leaves [cost, p_max)");
      }
    }
  }
  return eq;
}

}  // namespace

OpenLoopEquilibrium solve_open_loop_ne(const MarketConfig& config,
                                       const OpenLoopSolveOptions& options) {
  require_no_dropouts(config, "solve_open_loop_ne");
  const int n = config.n_agents;
  Eigen::MatrixXd start(config.horizon, n);
  for (int i = 0; i < n; ++i) {
    start.col(i).setConstant(
        0.5 * (config.initial_demands[i] + config.unit_costs[i]));
  }
  return newton_from(start, config, options);
}

std::vector<OpenLoopEquilibrium> solve_open_loop_ne_multistart(
    const MarketConfig& config, int starts, std::uint64_t seed) {
  require_no_dropouts(config, "solve_open_loop_ne");
  std::vector<OpenLoopEquilibrium> distinct;
  RngStream stream(mix_seed(seed, 0x6d73ULL));
  for (int s = 0; s < starts; ++s) {
    Eigen::MatrixXd start(config.horizon, config.n_agents);
    for (int t = 0; t < config.horizon; ++t) {
      for (int i = 0; i < config.n_agents; ++i) {
        start(t, i) = stream.uniform(config.unit_costs[i], config.p_max);
      }
    }
    OpenLoopEquilibrium eq;
    try {
      eq = newton_from(start, config, OpenLoopSolveOptions{});
    } catch (const Error&) {
      continue;  // non-convergent or infeasible start
    }
    const bool known =
        std::any_of(distinct.begin(), distinct.end(), [&](const auto& other) {
          return (other.prices - eq.prices).template lpNorm<Eigen::Infinity>() <=
                 1e-6;
        });
    if (!known) distinct.push_back(std::move(eq));
  }
  return distinct;
}

OpenLoopEquilibrium solve_open_loop_ne_kkt(const MarketConfig& config) {
  require_no_dropouts(config, "solve_open_loop_ne");
  const int horizon = config.horizon;
  const int n = config.n_agents;
  const int dim = horizon * n;
  const Eigen::MatrixXd jac = foc_jacobian(config);
  const Eigen::VectorXd base =
      foc_residuals(Eigen::MatrixXd::Zero(horizon, n), config);  // affine offset

  Eigen::VectorXd lower(dim), upper(dim), p(dim);
  for (int t = 0; t < horizon; ++t) {
    for (int i = 0; i < n; ++i) {
      lower(t * n + i) = config.unit_costs[i];
      upper(t * n + i) = config.p_max;
      p(t * n + i) = 0.5 * (config.initial_demands[i] + config.unit_costs[i]);
    }
  }

  enum : int { kFree = 0, kAtLower = 1, kAtUpper = 2 };
  std::vector<int> state(dim, kFree);
  constexpr double kEps = 1e-11;
  bool settled = false;
  for (int round = 0; round < 100 && !settled; ++round) {
    std::vector<int> free_idx;
    for (int k = 0; k < dim; ++k) {
      if (state[k] == kFree) free_idx.push_back(k);
      else p(k) = state[k] == kAtLower ? lower(k) : upper(k);
    }
    if (!free_idx.empty()) {
      const int nf = static_cast<int>(free_idx.size());
      Eigen::MatrixXd a(nf, nf);
      Eigen::VectorXd rhs(nf);
      for (int r = 0; r < nf; ++r) {
        rhs(r) = -base(free_idx[r]);
        for (int k = 0; k < dim; ++k) {
          if (state[k] != kFree) rhs(r) -= jac(free_idx[r], k) * p(k);
        }
        for (int c = 0; c < nf; ++c) a(r, c) = jac(free_idx[r], free_idx[c]);
      }
      const Eigen::VectorXd solution = a.partialPivLu().solve(rhs);
      for (int r = 0; r < nf; ++r) p(free_idx[r]) = solution(r);
    }

    bool changed = false;
    for (int k : free_idx) {
      if (p(k) < lower(k) - kEps) {
        state[k] = kAtLower;
        p(k) = lower(k);
        changed = true;
      } else if (p(k) > upper(k) + kEps) {
        state[k] = kAtUpper;
        p(k) = upper(k);
        changed = true;
      }
    }
    if (!changed) {
      // complementarity: a clamped price must not want to move back inside
      const Eigen::VectorXd grad = base + jac * p;
      for (int k = 0; k < dim; ++k) {
        if (state[k] == kAtLower && grad(k) > kEps) {
          state[k] = kFree;
          changed = true;
        } else if (state[k] == kAtUpper && grad(k) < -kEps) {
          state[k] = kFree;
          changed = true;
        }
      }
    }
    settled = !changed;
  }
  if (!settled) {
    throw Error(ErrorCode::kNoConvergence,
                "active set did not settle on the price box");
  }

  OpenLoopEquilibrium eq;
  eq.prices.resize(horizon, n);
  for (int t = 0; t < horizon; ++t) {
    for (int i = 0; i < n; ++i) eq.prices(t, i) = p(t * n + i);
  }
  eq.demands = propagate_demands(eq.prices, config);
  const Eigen::VectorXd grad = foc_residuals(eq.prices, config);
  double free_norm = 0.0;
  for (int k = 0; k < dim; ++k) {
    if (state[k] == kFree) free_norm = std::max(free_norm, std::abs(grad(k)));
  }
  eq.residual_norm = free_norm;
  if (free_norm > 1e-10) {
    throw Error(ErrorCode::kNoConvergence,
                "free-entry stationarity defect " + std::to_string(free_norm));
  }
  if ((eq.demands.array() < -1e-12).any()) {
    throw Error(ErrorCode::kConstraintViolated,
                "boundary equilibrium leaves a negative demand");
  }
  return eq;
}

SecondOrderReport check_second_order(const MarketConfig& config,
                                     const Eigen::MatrixXd& prices,
                                     double fd_step) {
  require_no_dropouts(config, "check_second_order");
  const int horizon = config.horizon;
  const int n = config.n_agents;
  SecondOrderReport report;
  report.fd_step = fd_step;
  report.all_negative = true;
  report.eigenvalues.reserve(n);

  const double h = fd_step;
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd hess(horizon, horizon);
    for (int a = 0; a < horizon; ++a) {
      for (int b = a; b < horizon; ++b) {
        auto probe = [&](double da, double db) {
          Eigen::MatrixXd p = prices;
          p(a, i) += da;
          p(b, i) += db;
          return open_path_utility(p, config, i);
        };
        const double v = (probe(h, h) - probe(h, -h) - probe(-h, h) +
                          probe(-h, -h)) /
                         (4.0 * h * h);
        hess(a, b) = v;
        hess(b, a) = v;
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hess);
    report.eigenvalues.push_back(solver.eigenvalues());
    if ((solver.eigenvalues().array() >= 0.0).any()) report.all_negative = false;
  }
  return report;
}

LinearFeedbackEquilibrium solve_feedback_ne(const MarketConfig& config) {
  require_no_dropouts(config, "solve_feedback_ne");
  const int horizon = config.horizon;
  const int n = config.n_agents;
  const double coupling = static_cast<double>(n - 1) / n;
  const double total_demand =
      Eigen::Map<const Eigen::VectorXd>(config.initial_demands.data(), n).sum();

  LinearFeedbackEquilibrium eq;
  eq.lambda1.resize(horizon, n);
  eq.lambda2.resize(horizon, n);

  // Continuation value of firm i from stage t+1 on, as a quadratic in its own
  // intercept: kappa0_i + kappa1_i * D + kappa2 * D^2. The quadratic
  // coefficient is shared across firms (asymmetry enters only linearly).
  Eigen::VectorXd kappa0 = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd kappa1 = Eigen::VectorXd::Zero(n);
  double kappa2 = 0.0;

  for (int t = horizon - 1; t >= 0; --t) {
    const double twice_mk2 = 2.0 * coupling * kappa2;
    const double denom = 2.0 - twice_mk2;
    if (std::abs(denom) < 1e-12) {
      throw Error(ErrorCode::kSingularStageSystem,
                  "stage " + std::to_string(t + 1) + " system is singular");
    }
    const double slope = (1.0 - twice_mk2) / denom;

    double intercept_sum = 0.0;  // sum_i (c_i - m * kappa1_i)
    for (int i = 0; i < n; ++i) {
      intercept_sum += config.unit_costs[i] - coupling * kappa1(i);
    }
    // The inertia update conserves total demand for any price profile, which
    // pins the stage mean price independently of the state.
    const double mean_price =
        (total_demand * (1.0 - twice_mk2) + intercept_sum) / (2.0 * n);

    for (int i = 0; i < n; ++i) {
      eq.lambda2(t, i) = slope;
      eq.lambda1(t, i) = (config.unit_costs[i] - coupling * kappa1(i) -
                          twice_mk2 * mean_price) /
                         denom;
    }

    // Fold the stage into the value functions: reward plus continuation at
    // D' = (1 - slope) * D + (mean_price - lambda1_i).
    const double carry = 1.0 - slope;
    const double next_kappa2 = slope * carry + kappa2 * carry * carry;
    for (int i = 0; i < n; ++i) {
      const double l1 = eq.lambda1(t, i);
      const double drift = mean_price - l1;
      const double margin0 = l1 - config.unit_costs[i];
      const double new_kappa1 = margin0 * carry - slope * l1 + kappa1(i) * carry +
                                2.0 * kappa2 * carry * drift;
      const double new_kappa0 = -l1 * margin0 + kappa0(i) + kappa1(i) * drift +
                                kappa2 * drift * drift;
      kappa1(i) = new_kappa1;
      kappa0(i) = new_kappa0;
    }
    kappa2 = next_kappa2;
  }
  return eq;
}

StrategyProfile open_loop_profile(const OpenLoopEquilibrium& eq) {
  StrategyProfile profile;
  for (int i = 0; i < eq.prices.cols(); ++i) {
    std::vector<double> path(eq.prices.rows());
    for (int t = 0; t < eq.prices.rows(); ++t) path[t] = eq.prices(t, i);
    profile.push_back(std::make_shared<TablePolicy>(std::move(path)));
  }
  return profile;
}

StrategyProfile feedback_profile(const LinearFeedbackEquilibrium& eq,
                                 const MarketConfig& config) {
  StrategyProfile profile;
  for (int i = 0; i < config.n_agents; ++i) {
    std::vector<double> l1(config.horizon), l2(config.horizon);
    for (int t = 0; t < config.horizon; ++t) {
      l1[t] = eq.lambda1(t, i);
      l2[t] = eq.lambda2(t, i);
    }
    profile.push_back(std::make_shared<AffineDemandPolicy>(
        i, std::move(l1), std::move(l2), config.unit_costs[i], config.p_max));
  }
  return profile;
}

StrategyProfile analytic_profile_for(const MarketConfig& config) {
  MarketConfig no_dropout = config;
  no_dropout.dropouts_enabled = false;
  if (config.information == Information::kPartiallyObservable) {
    // Fall back to the boundary equilibrium where the interior stationary
    // point leaves the price box (strong cost asymmetry).
    try {
      return open_loop_profile(solve_open_loop_ne(no_dropout));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kConstraintViolated) throw;
      return open_loop_profile(solve_open_loop_ne_kkt(no_dropout));
    }
  }
  return feedback_profile(solve_feedback_ne(no_dropout), no_dropout);
}

}  // namespace oligo
