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

#include "oligo/learn.hpp"

#include <cmath>
#include <doctest.h>

#include "oligo/rng.hpp"

using namespace oligo;

namespace {

bool close_rel(double a, double b, double tol = 1e-4) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-6});
}

std::vector<double> gradients_flat(const nn::Gradients& grads) {
  std::vector<double> flat;
  for (const auto& layer : grads) {
    flat.insert(flat.end(), layer.w.data(), layer.w.data() + layer.w.size());
    flat.insert(flat.end(), layer.b.data(), layer.b.data() + layer.b.size());
  }
  return flat;
}

MarketConfig small_config(Information info) {
  return make_market_config(2, 3, {0.6, 0.8}, {1.0, 1.0}, true, info);
}

// A fixed self-play batch from freshly initialized width-2 actors.
struct Fixture {
  MarketConfig config;
  PolicySpec spec{3, 2};
  std::vector<nn::Mlp> actors;
  std::vector<nn::Mlp> critics;
  CollectedIteration collected;

  explicit Fixture(Information info, int trajectories = 24)
      : config(small_config(info)) {
    const ObservationEncoder enc = ObservationEncoder::for_config(config);
    for (int i = 0; i < config.n_agents; ++i) {
      actors.emplace_back(spec.actor_sizes(enc.size()), 0x100 + i);
      critics.emplace_back(spec.critic_sizes(enc.size()), 0x200 + i);
    }
    collected = collect_selfplay(config, actors, &critics, trajectories, 0xF1);
  }
};

}  // namespace

TEST_CASE("observation encoding layouts") {
  MarketConfig partial = make_market_config(3, 4, {0.8, 0.8, 0.8},
                                            {1.0, 1.0, 1.0}, false,
                                            Information::kPartiallyObservable);
  MarketState state = initial_state(partial);
  CHECK(encode_observation(observe(state, partial, 0), partial) ==
        std::vector<double>{0.25});

  MarketConfig full = partial;
  full.information = Information::kFullyObservable;
  state.t = 4;
  const std::vector<double> features =
      encode_observation(observe(state, full, 1), full);
  REQUIRE(features.size() == 7);
  CHECK(features[0] == doctest::Approx(1.0));
  for (int i = 1; i <= 3; ++i) {
    CHECK(features[i] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-9));
  }
  for (int i = 4; i <= 6; ++i) CHECK(features[i] == 1.0);

  // an exited firm contributes a zero intercept and a zero flag
  state.active[2] = 0;
  state.demands[2] = 0.0;
  const std::vector<double> with_exit =
      encode_observation(observe(state, full, 0), full);
  CHECK(with_exit[3] == 0.0);
  CHECK(with_exit[6] == 0.0);
}

TEST_CASE("policy action maps the beta draw onto the price box") {
  // zero weights, biases pinned so the head is Beta(3, 2)
  nn::Mlp net({1, 2}, 0x0);
  auto& layers = net.mutable_layers();
  layers[0].w.setZero();
  layers[0].b(0) = std::log(std::exp(2.0) - 1.0);  // softplus^-1(2)
  layers[0].b(1) = std::log(std::exp(1.0) - 1.0);  // softplus^-1(1)

  ObservationEncoder enc{4, 1, 1.0, false};
  NeuralPolicy policy(net, enc, 0.8, 1.0, NeuralPolicy::Mode::kMode);
  Observation obs;
  obs.t = 1;
  const nn::BetaParams head = policy.head_at(obs);
  CHECK(head.alpha == doctest::Approx(3.0).epsilon(1e-5));
  CHECK(head.beta == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(policy.act(obs, nullptr) ==
        doctest::Approx(0.8 + (2.0 / 3.0) * 0.2).epsilon(1e-6));

  // a symmetric head takes the midpoint
  layers[0].b(1) = layers[0].b(0);
  NeuralPolicy midpoint(net, enc, 0.8, 1.0, NeuralPolicy::Mode::kMode);
  CHECK(midpoint.act(obs, nullptr) == doctest::Approx(0.9).epsilon(1e-9));

  // sampled actions always stay inside [lo, hi]
  NeuralPolicy sampler(net, enc, 0.8, 1.0, NeuralPolicy::Mode::kSample);
  RngStream stream(0xFEED);
  for (int k = 0; k < 2000; ++k) {
    const double price = sampler.act(obs, &stream);
    CHECK(price >= 0.8);
    CHECK(price <= 1.0);
  }
  // quantile endpoints approach the box endpoints
  CHECK(sampler.act_quantile(obs, 1e-12) == doctest::Approx(0.8).epsilon(1e-4));
  CHECK(sampler.act_quantile(obs, 1.0 - 1e-12) ==
        doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("returns-to-go and the per-stage baseline") {
  AgentBatch batch;
  batch.horizon = 3;
  batch.reward.resize(6);
  batch.reward << 1.0, 2.0, 3.0, 1.0, 2.0, 3.0;
  batch.stage = {1, 2, 3, 1, 2, 3};
  batch.traj_offset = {0, 3, 6};
  batch.obs = Eigen::MatrixXd::Zero(1, 6);
  batch.unit_action = Eigen::VectorXd::Constant(6, 0.5);
  batch.logp_old = Eigen::VectorXd::Zero(6);
  batch.value_old = Eigen::VectorXd::Zero(6);

  const Eigen::VectorXd g = returns_to_go(batch);
  CHECK(g(0) == 6.0);
  CHECK(g(1) == 5.0);
  CHECK(g(2) == 3.0);

  // identical trajectories: the per-stage baseline removes everything
  const Eigen::VectorXd adv = reinforce_advantages(batch);
  for (int r = 0; r < 6; ++r) CHECK(adv(r) == 0.0);
}

TEST_CASE("gae advantages match a hand-rolled recursion") {
  AgentBatch batch;
  batch.horizon = 3;
  batch.reward.resize(3);
  batch.reward << 1.0, 2.0, 3.0;
  batch.value_old.resize(3);
  batch.value_old << 0.5, 0.5, 0.5;
  batch.stage = {1, 2, 3};
  batch.traj_offset = {0, 3};
  batch.obs = Eigen::MatrixXd::Zero(1, 3);
  batch.unit_action = Eigen::VectorXd::Constant(3, 0.5);
  batch.logp_old = Eigen::VectorXd::Zero(3);

  PpoSettings settings;
  Eigen::VectorXd adv, ret;
  gae_advantages(batch, settings, &adv, &ret);
  CHECK(adv(2) == doctest::Approx(2.5));
  CHECK(adv(1) == doctest::Approx(2.0 + 0.95 * 2.5));
  CHECK(adv(0) == doctest::Approx(1.0 + 0.95 * (2.0 + 0.95 * 2.5)));
  for (int r = 0; r < 3; ++r) {
    CHECK(ret(r) == doctest::Approx(adv(r) + 0.5));
  }
}

TEST_CASE("reinforce gradient matches central finite differences") {
  for (Information info :
       {Information::kPartiallyObservable, Information::kFullyObservable}) {
    Fixture fx(info);
    for (int agent = 0; agent < fx.config.n_agents; ++agent) {
      const AgentBatch& batch = fx.collected.batches[agent];
      const Eigen::VectorXd advantage = reinforce_advantages(batch);
      const nn::Gradients grads =
          reinforce_gradient(fx.actors[agent], batch, advantage);
      const std::vector<double> grad_flat = gradients_flat(grads);

      const std::vector<double> theta = fx.actors[agent].flatten();
      const double h = 1e-5;
      for (std::size_t k = 0; k < theta.size(); ++k) {
        nn::Mlp probe = fx.actors[agent];
        std::vector<double> bumped = theta;
        bumped[k] += h;
        probe.load_flat(bumped);
        const double up = reinforce_loss(probe, batch, advantage);
        bumped[k] = theta[k] - h;
        probe.load_flat(bumped);
        const double down = reinforce_loss(probe, batch, advantage);
        const double fd = (up - down) / (2.0 * h);
        CHECK(close_rel(grad_flat[k], fd));
      }
    }
  }
}

TEST_CASE("ppo gradient matches central finite differences") {
  Fixture fx(Information::kFullyObservable);
  const int agent = 0;
  const AgentBatch& batch = fx.collected.batches[agent];
  PpoSettings settings;
  Eigen::VectorXd advantage, value_target;
  gae_advantages(batch, settings, &advantage, &value_target);
  std::vector<int> index(batch.rows());
  for (int r = 0; r < batch.rows(); ++r) index[r] = r;

  nn::Gradients actor_grads = fx.actors[agent].zero_gradients();
  nn::Gradients critic_grads = fx.critics[agent].zero_gradients();
  ppo_gradient(fx.actors[agent], fx.critics[agent], batch, advantage,
               value_target, index, settings, &actor_grads, &critic_grads);

  const double h = 1e-5;
  SUBCASE("actor parameters") {
    const std::vector<double> grad_flat = gradients_flat(actor_grads);
    const std::vector<double> theta = fx.actors[agent].flatten();
    for (std::size_t k = 0; k < theta.size(); ++k) {
      nn::Mlp probe = fx.actors[agent];
      std::vector<double> bumped = theta;
      bumped[k] += h;
      probe.load_flat(bumped);
      const double up = ppo_loss(probe, fx.critics[agent], batch, advantage,
                                 value_target, index, settings);
      bumped[k] = theta[k] - h;
      probe.load_flat(bumped);
      const double down = ppo_loss(probe, fx.critics[agent], batch, advantage,
                                   value_target, index, settings);
      CHECK(close_rel(grad_flat[k], (up - down) / (2.0 * h)));
    }
  }
  SUBCASE("critic parameters") {
    const std::vector<double> grad_flat = gradients_flat(critic_grads);
    const std::vector<double> theta = fx.critics[agent].flatten();
    for (std::size_t k = 0; k < theta.size(); ++k) {
      nn::Mlp probe = fx.critics[agent];
      std::vector<double> bumped = theta;
      bumped[k] += h;
      probe.load_flat(bumped);
      const double up = ppo_loss(fx.actors[agent], probe, batch, advantage,
                                 value_target, index, settings);
      bumped[k] = theta[k] - h;
      probe.load_flat(bumped);
      const double down = ppo_loss(fx.actors[agent], probe, batch, advantage,
                                   value_target, index, settings);
      CHECK(close_rel(grad_flat[k], (up - down) / (2.0 * h)));
    }
  }
}

TEST_CASE("one-parameter toy policy gradient check") {
  // single input weight, biases frozen by zero advantage on the other head
  nn::Mlp net({1, 2}, 0x31);
  AgentBatch batch;
  batch.horizon = 1;
  batch.obs = Eigen::MatrixXd::Constant(1, 4, 0.25);
  batch.unit_action.resize(4);
  batch.unit_action << 0.3, 0.5, 0.7, 0.4;
  batch.reward = Eigen::VectorXd::Constant(4, 0.0);
  batch.logp_old = Eigen::VectorXd::Zero(4);
  batch.value_old = Eigen::VectorXd::Zero(4);
  batch.stage = {1, 1, 1, 1};
  batch.traj_offset = {0, 1, 2, 3, 4};
  Eigen::VectorXd advantage(4);
  advantage << 0.2, -0.1, 0.4, 0.05;

  const nn::Gradients grads = reinforce_gradient(net, batch, advantage);
  const std::vector<double> grad_flat = gradients_flat(grads);
  const std::vector<double> theta = net.flatten();
  const double h = 1e-5;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    nn::Mlp probe = net;
    std::vector<double> bumped = theta;
    bumped[k] += h;
    probe.load_flat(bumped);
    const double up = reinforce_loss(probe, batch, advantage);
    bumped[k] = theta[k] - h;
    probe.load_flat(bumped);
    const double down = reinforce_loss(probe, batch, advantage);
    CHECK(close_rel(grad_flat[k], (up - down) / (2.0 * h)));
  }
}

TEST_CASE("zero advantage moves nothing") {
  Fixture fx(Information::kPartiallyObservable);
  const AgentBatch& batch = fx.collected.batches[0];
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(batch.rows());

  const nn::Gradients grads = reinforce_gradient(fx.actors[0], batch, zero);
  for (double g : gradients_flat(grads)) CHECK(g == 0.0);

  PpoSettings settings;
  std::vector<int> index(batch.rows());
  for (int r = 0; r < batch.rows(); ++r) index[r] = r;
  nn::Gradients actor_grads = fx.actors[0].zero_gradients();
  nn::Gradients critic_grads = fx.critics[0].zero_gradients();
  const Eigen::VectorXd targets = Eigen::VectorXd::Constant(batch.rows(), 0.1);
  ppo_gradient(fx.actors[0], fx.critics[0], batch, zero, targets, index,
               settings, &actor_grads, &critic_grads);
  for (double g : gradients_flat(actor_grads)) CHECK(g == 0.0);
  // the critic still learns its value targets
  double critic_norm = 0.0;
  for (double g : gradients_flat(critic_grads)) critic_norm += std::abs(g);
  CHECK(critic_norm > 0.0);
}

TEST_CASE("inside the clip band the surrogate is the plain policy gradient") {
  Fixture fx(Information::kFullyObservable);
  const AgentBatch& batch = fx.collected.batches[1];
  PpoSettings tight;  // ratios are exactly one here, strictly inside any band
  PpoSettings loose = tight;
  loose.clip = 1e9;
  Eigen::VectorXd advantage, targets;
  gae_advantages(batch, tight, &advantage, &targets);
  std::vector<int> index(batch.rows());
  for (int r = 0; r < batch.rows(); ++r) index[r] = r;

  nn::Gradients a1 = fx.actors[1].zero_gradients();
  nn::Gradients c1 = fx.critics[1].zero_gradients();
  ppo_gradient(fx.actors[1], fx.critics[1], batch, advantage, targets, index,
               tight, &a1, &c1);
  nn::Gradients a2 = fx.actors[1].zero_gradients();
  nn::Gradients c2 = fx.critics[1].zero_gradients();
  ppo_gradient(fx.actors[1], fx.critics[1], batch, advantage, targets, index,
               loose, &a2, &c2);
  CHECK(gradients_flat(a1) == gradients_flat(a2));
}

TEST_CASE("training is deterministic given the seed") {
  MarketConfig config = small_config(Information::kPartiallyObservable);
  TrainConfig tc = TrainConfig::defaults_for(Algo::kReinforce);
  tc.iterations = 3;
  tc.trajectories_per_iteration = 50;
  tc.seed = 42;
  const LearnedProfile a = train_selfplay(config, Algo::kReinforce, tc, {3, 8});
  const LearnedProfile b = train_selfplay(config, Algo::kReinforce, tc, {3, 8});
  for (int i = 0; i < config.n_agents; ++i) {
    CHECK(a.actors[i].flatten() == b.actors[i].flatten());
  }
  CHECK(a.log.size() == b.log.size());
  for (std::size_t k = 0; k < a.log.size(); ++k) {
    CHECK(a.log[k].mean_utility == b.log[k].mean_utility);
  }

  tc.seed = 43;
  const LearnedProfile c = train_selfplay(config, Algo::kReinforce, tc, {3, 8});
  CHECK(a.actors[0].flatten() != c.actors[0].flatten());
}

TEST_CASE("updates are simultaneous: each agent sees pre-update opponents") {
  MarketConfig config = small_config(Information::kPartiallyObservable);
  TrainConfig tc = TrainConfig::defaults_for(Algo::kReinforce);
  tc.iterations = 1;
  tc.trajectories_per_iteration = 40;
  tc.seed = 7;
  const PolicySpec spec{2, 4};
  const LearnedProfile trained =
      train_selfplay(config, Algo::kReinforce, tc, spec);

  // replay the single iteration by hand for agent 1, never touching agent 0
  const ObservationEncoder enc = ObservationEncoder::for_config(config);
  std::vector<nn::Mlp> actors;
  for (int i = 0; i < config.n_agents; ++i) {
    actors.emplace_back(spec.actor_sizes(enc.size()),
                        mix_seed(tc.seed, 0xA0ULL, static_cast<std::uint64_t>(i)));
  }
  const CollectedIteration collected = collect_selfplay(
      config, actors, nullptr, tc.trajectories_per_iteration,
      mix_seed(tc.seed, 0x17e2ULL, 1ULL));
  const Eigen::VectorXd advantage =
      reinforce_advantages(collected.batches[1]);
  const nn::Gradients grads =
      reinforce_gradient(actors[1], collected.batches[1], advantage);
  nn::Adam opt(actors[1]);
  opt.step(&actors[1], grads, tc.lr_at(1));
  CHECK(actors[1].flatten() == trained.actors[1].flatten());
}

TEST_CASE("extracted and sampled prices stay inside the box") {
  MarketConfig config = small_config(Information::kFullyObservable);
  TrainConfig tc = TrainConfig::defaults_for(Algo::kPpo);
  tc.iterations = 2;
  tc.trajectories_per_iteration = 60;
  tc.seed = 11;
  const LearnedProfile learned = train_selfplay(config, Algo::kPpo, tc, {2, 4});

  RolloutOptions options;
  options.on_all_exit = AllExitHandling::kDegenerate;
  const Trajectory traj = rollout(learned.extract(), config, options);
  for (std::size_t t = 0; t < traj.outcomes.size(); ++t) {
    for (int i = 0; i < config.n_agents; ++i) {
      if (!traj.states[t].active[i]) continue;
      CHECK(traj.outcomes[t].prices[i] >= config.unit_costs[i]);
      CHECK(traj.outcomes[t].prices[i] <= config.p_max);
    }
  }
  options.seed = 3;
  const Trajectory sampled =
      rollout(learned.sampling_profile(), config, options);
  for (std::size_t t = 0; t < sampled.outcomes.size(); ++t) {
    for (int i = 0; i < config.n_agents; ++i) {
      if (!sampled.states[t].active[i]) continue;
      CHECK(sampled.outcomes[t].prices[i] >= config.unit_costs[i]);
      CHECK(sampled.outcomes[t].prices[i] <= config.p_max);
    }
  }
}

TEST_CASE("a ppo iteration on the monopoly game improves mean utility") {
  MarketConfig config = make_market_config(
      1, 4, {0.8}, {1.0}, false, Information::kPartiallyObservable, 1.2);
  int improved = 0;
  for (int seed = 0; seed < 5; ++seed) {
    TrainConfig tc = TrainConfig::defaults_for(Algo::kPpo);
    tc.iterations = 2;
    tc.trajectories_per_iteration = 2000;
    tc.seed = seed;
    const LearnedProfile learned = train_selfplay(config, Algo::kPpo, tc);
    REQUIRE(learned.log.size() == 2);
    if (learned.log[1].mean_utility > learned.log[0].mean_utility) ++improved;
  }
  CHECK(improved >= 4);
}

TEST_CASE("lr schedule divides on time") {
  TrainConfig ppo = TrainConfig::defaults_for(Algo::kPpo);
  CHECK(ppo.lr_at(1) == doctest::Approx(8.57e-4));
  CHECK(ppo.lr_at(250) == doctest::Approx(8.57e-4));
  CHECK(ppo.lr_at(251) == doctest::Approx(8.57e-4 / 8.0));
  CHECK(ppo.lr_at(750) == doctest::Approx(8.57e-4 / 64.0));
  CHECK(ppo.lr_at(751) == doctest::Approx(8.57e-4 / 512.0));
  TrainConfig reinforce = TrainConfig::defaults_for(Algo::kReinforce);
  CHECK(reinforce.lr_at(500) == doctest::Approx(2.864e-4 / 2.0));
}
