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

#ifndef OLIGO_LEARN_HPP_
#define OLIGO_LEARN_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "oligo/market.hpp"
#include "oligo/nn.hpp"
#include "oligo/profiles.hpp"

namespace oligo {

enum class Algo { kReinforce, kPpo };

std::string algo_name(Algo algo);
Algo algo_from_name(const std::string& name);

// Actor (and critic) architecture: SeLU trunk with a two-output beta head on
// the actor, scalar head on the critic.
struct PolicySpec {
  int hidden_layers = 3;
  int hidden_units = 64;

  std::vector<int> actor_sizes(int obs_size) const;
  std::vector<int> critic_sizes(int obs_size) const;
};

struct TrainConfig {
  int iterations = 1000;
  int trajectories_per_iteration = 20000;
  double learning_rate = 0.0;
  double lr_decay_factor = 1.0;  // learning rate divided by this ...
  int lr_decay_every = 250;      // ... every this many iterations
  std::uint64_t seed = 0;

  static TrainConfig defaults_for(Algo algo);
  double lr_at(int iteration) const;  // iteration is 1-based
};

// Fixed PPO details (the conventional values; entropy bonus is zero).
struct PpoSettings {
  double clip = 0.2;
  double gae_lambda = 0.95;
  double gamma = 1.0;
  int epochs = 10;
  int minibatch = 2048;
  double value_coef = 0.5;
};

// Feature layout fed to the networks: partial information is [t/T]; full
// information is [t/T, demands scaled by the demand cap, activity flags].
struct ObservationEncoder {
  int horizon = 0;
  int n_agents = 0;
  double demand_cap = 1.0;
  bool full = false;

  static ObservationEncoder for_config(const MarketConfig& config);
  int size() const { return full ? 1 + 2 * n_agents : 1; }
  void encode(const Observation& obs, double* out) const;
};

std::vector<double> encode_observation(const Observation& obs,
                                       const MarketConfig& config);

// Deterministic-mode or sampling wrapper around an actor network. The action
// is the beta draw (or its mode) mapped affinely onto [price_lo, price_hi].
class NeuralPolicy : public Policy {
 public:
  enum class Mode { kMode, kSample };

  NeuralPolicy(nn::Mlp actor, ObservationEncoder encoder, double price_lo,
               double price_hi, Mode mode);

  bool deterministic() const override { return mode_ == Mode::kMode; }
  double act(const Observation& obs, RngStream* rng) const override;
  double act_quantile(const Observation& obs, double u) const override;

  const nn::Mlp& actor() const { return actor_; }
  double price_lo() const { return lo_; }
  double price_hi() const { return hi_; }

  nn::BetaParams head_at(const Observation& obs) const;

 private:
  nn::Mlp actor_;
  ObservationEncoder encoder_;
  double lo_, hi_;
  Mode mode_;
};

struct TrainingLogEntry {
  int iteration = 0;
  int agent = 0;
  double mean_utility = 0.0;
  double lr = 0.0;
};

struct LearnedProfile {
  MarketConfig config;
  Algo algo = Algo::kPpo;
  PolicySpec spec;
  std::vector<nn::Mlp> actors;
  std::vector<TrainingLogEntry> log;

  StrategyProfile extract() const;        // most-likely-action policies
  StrategyProfile sampling_profile() const;
};

// One agent's collected experience for an iteration; rows are the (trajectory,
// stage) pairs where the agent acted, trajectory-major.
struct AgentBatch {
  Eigen::MatrixXd obs;          // obs_size x rows
  Eigen::VectorXd unit_action;  // beta draw in (0,1)
  Eigen::VectorXd logp_old;     // log-density of the draw (unit scale)
  Eigen::VectorXd reward;
  Eigen::VectorXd value_old;    // critic at collection time (PPO)
  std::vector<int> stage;       // 1-based stage per row
  std::vector<int> traj_offset; // size = trajectories + 1
  int horizon = 0;

  int rows() const { return static_cast<int>(unit_action.size()); }
  int trajectories() const { return static_cast<int>(traj_offset.size()) - 1; }
};

Eigen::VectorXd returns_to_go(const AgentBatch& batch);
// Return-to-go minus the per-stage batch mean return-to-go.
Eigen::VectorXd reinforce_advantages(const AgentBatch& batch);
// GAE(lambda) advantages and value targets from rewards and old values.
void gae_advantages(const AgentBatch& batch, const PpoSettings& settings,
                    Eigen::VectorXd* advantages, Eigen::VectorXd* returns);

// Surrogate whose gradient is the REINFORCE policy gradient (negated for
// descent), averaged over trajectories: -1/B sum log pi(x) * advantage.
double reinforce_loss(const nn::Mlp& actor, const AgentBatch& batch,
                      const Eigen::VectorXd& advantage);
nn::Gradients reinforce_gradient(const nn::Mlp& actor, const AgentBatch& batch,
                                 const Eigen::VectorXd& advantage);

// Clipped-surrogate PPO loss over the minibatch rows in `index`, plus the
// value term; advantages are normalized inside over the minibatch.
double ppo_loss(const nn::Mlp& actor, const nn::Mlp& critic,
                const AgentBatch& batch, const Eigen::VectorXd& advantage,
                const Eigen::VectorXd& value_target,
                const std::vector<int>& index, const PpoSettings& settings);
void ppo_gradient(const nn::Mlp& actor, const nn::Mlp& critic,
                  const AgentBatch& batch, const Eigen::VectorXd& advantage,
                  const Eigen::VectorXd& value_target,
                  const std::vector<int>& index, const PpoSettings& settings,
                  nn::Gradients* actor_grads, nn::Gradients* critic_grads);

// Self-play collection with every agent sampling; counter-based trajectory
// seeds make the result independent of any parallel split.
struct CollectedIteration {
  std::vector<AgentBatch> batches;       // per agent
  std::vector<double> mean_utility;      // per agent
};
CollectedIteration collect_selfplay(const MarketConfig& config,
                                    const std::vector<nn::Mlp>& actors,
                                    const std::vector<nn::Mlp>* critics,
                                    int trajectories, std::uint64_t seed);

struct TrainCallbacks {
  // Called after each iteration with the fresh log entries; may be null.
  void (*on_iteration)(void* ctx, const std::vector<TrainingLogEntry>& entries) =
      nullptr;
  void* ctx = nullptr;
};

// Simultaneous policy-gradient self-play; all agents' updates in an iteration
// are computed against the pre-update opponents.
LearnedProfile train_selfplay(const MarketConfig& config, Algo algo,
                              const TrainConfig& tc,
                              const PolicySpec& spec = {},
                              const TrainCallbacks& callbacks = {});

}  // namespace oligo

#endif  // OLIGO_LEARN_HPP_
