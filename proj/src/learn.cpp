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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <boost/math/special_functions/beta.hpp>

namespace oligo {

namespace {

constexpr double kUnitEps = 1e-15;

double clamp_unit(double x) {
  return std::clamp(x, kUnitEps, 1.0 - kUnitEps);
}

nn::BetaParams head_at_col(const Eigen::MatrixXd& out, int col) {
  return nn::beta_head(out(0, col), out(1, col));
}

// Exact-byte deduplication of observation columns; the payoff is under
// partial information, where at most `horizon` distinct columns exist.
struct UniqueColumns {
  Eigen::MatrixXd cols;
  std::vector<int> map;  // input position -> unique column
};

UniqueColumns unique_columns(const Eigen::MatrixXd& obs,
                             const std::vector<int>* subset) {
  const int d = static_cast<int>(obs.rows());
  const int m = subset ? static_cast<int>(subset->size())
                       : static_cast<int>(obs.cols());
  std::unordered_map<std::uint64_t, std::vector<int>> buckets;
  UniqueColumns result;
  result.map.resize(m);
  std::vector<int> unique_src;
  unique_src.reserve(std::min(m, 64));

  for (int k = 0; k < m; ++k) {
    const int col = subset ? (*subset)[k] : k;
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (int r = 0; r < d; ++r) {
      std::uint64_t bits;
      const double v = obs(r, col);
      std::memcpy(&bits, &v, sizeof(bits));
      h = (h ^ bits) * 0x100000001b3ULL;
    }
    auto& bucket = buckets[h];
    int found = -1;
    for (int u : bucket) {
      if (obs.col(unique_src[u]) == obs.col(col)) {
        found = u;
        break;
      }
    }
    if (found < 0) {
      found = static_cast<int>(unique_src.size());
      unique_src.push_back(col);
      bucket.push_back(found);
    }
    result.map[k] = found;
  }
  result.cols.resize(d, unique_src.size());
  for (std::size_t u = 0; u < unique_src.size(); ++u) {
    result.cols.col(u) = obs.col(unique_src[u]);
  }
  return result;
}

}  // namespace

std::string algo_name(Algo algo) {
  return algo == Algo::kReinforce ? "reinforce" : "ppo";
}

Algo algo_from_name(const std::string& name) {
  if (name == "reinforce") return Algo::kReinforce;
  if (name == "ppo") return Algo::kPpo;
  throw Error(ErrorCode::kConfigInvalid, "unknown algorithm '" + name + "'");
}

std::vector<int> PolicySpec::actor_sizes(int obs_size) const {
  std::vector<int> sizes{obs_size};
  sizes.insert(sizes.end(), hidden_layers, hidden_units);
  sizes.push_back(2);
  return sizes;
}

std::vector<int> PolicySpec::critic_sizes(int obs_size) const {
  std::vector<int> sizes{obs_size};
  sizes.insert(sizes.end(), hidden_layers, hidden_units);
  sizes.push_back(1);
  return sizes;
}

TrainConfig TrainConfig::defaults_for(Algo algo) {
  TrainConfig tc;
  if (algo == Algo::kPpo) {
    tc.learning_rate = 8.57e-4;
    tc.lr_decay_factor = 8.0;
  } else {
    tc.learning_rate = 2.864e-4;
    tc.lr_decay_factor = 2.0;
  }
  return tc;
}

double TrainConfig::lr_at(int iteration) const {
  const int drops = (iteration - 1) / lr_decay_every;
  return learning_rate / std::pow(lr_decay_factor, drops);
}

ObservationEncoder ObservationEncoder::for_config(const MarketConfig& config) {
  ObservationEncoder enc;
  enc.horizon = config.horizon;
  enc.n_agents = config.n_agents;
  enc.demand_cap = config.demand_cap();
  enc.full = config.information == Information::kFullyObservable;
  return enc;
}

void ObservationEncoder::encode(const Observation& obs, double* out) const {
  out[0] = static_cast<double>(obs.t) / horizon;
  if (!full) return;
  const double scale = demand_cap > 0.0 ? 1.0 / demand_cap : 1.0;
  for (int i = 0; i < n_agents; ++i) {
    out[1 + i] = obs.demands[i] * scale;
    out[1 + n_agents + i] = obs.active[i] ? 1.0 : 0.0;
  }
}

std::vector<double> encode_observation(const Observation& obs,
                                       const MarketConfig& config) {
  const ObservationEncoder enc = ObservationEncoder::for_config(config);
  std::vector<double> features(enc.size());
  enc.encode(obs, features.data());
  return features;
}

NeuralPolicy::NeuralPolicy(nn::Mlp actor, ObservationEncoder encoder,
                           double price_lo, double price_hi, Mode mode)
    : actor_(std::move(actor)),
      encoder_(encoder),
      lo_(price_lo),
      hi_(price_hi),
      mode_(mode) {}

nn::BetaParams NeuralPolicy::head_at(const Observation& obs) const {
  Eigen::MatrixXd features(encoder_.size(), 1);
  encoder_.encode(obs, features.data());
  const Eigen::MatrixXd out = actor_.forward(features);
  return nn::beta_head(out(0, 0), out(1, 0));
}

double NeuralPolicy::act(const Observation& obs, RngStream* rng) const {
  const nn::BetaParams params = head_at(obs);
  double x;
  if (mode_ == Mode::kMode) {
    x = nn::beta_mode(params);
  } else {
    if (rng == nullptr) {
      throw Error(ErrorCode::kConfigInvalid,
                  "sampling policy queried without a random stream");
    }
    x = rng->beta(params.alpha, params.beta);
  }
  return lo_ + x * (hi_ - lo_);
}

double NeuralPolicy::act_quantile(const Observation& obs, double u) const {
  if (mode_ == Mode::kMode) return act(obs, nullptr);
  const nn::BetaParams params = head_at(obs);
  const double x = boost::math::ibeta_inv(params.alpha, params.beta,
                                          clamp_unit(u));
  return lo_ + x * (hi_ - lo_);
}

StrategyProfile LearnedProfile::extract() const {
  const ObservationEncoder enc = ObservationEncoder::for_config(config);
  StrategyProfile profile;
  for (int i = 0; i < config.n_agents; ++i) {
    profile.push_back(std::make_shared<NeuralPolicy>(
        actors[i], enc, config.unit_costs[i], config.p_max,
        NeuralPolicy::Mode::kMode));
  }
  return profile;
}

StrategyProfile LearnedProfile::sampling_profile() const {
  const ObservationEncoder enc = ObservationEncoder::for_config(config);
  StrategyProfile profile;
  for (int i = 0; i < config.n_agents; ++i) {
    profile.push_back(std::make_shared<NeuralPolicy>(
        actors[i], enc, config.unit_costs[i], config.p_max,
        NeuralPolicy::Mode::kSample));
  }
  return profile;
}

Eigen::VectorXd returns_to_go(const AgentBatch& batch) {
  Eigen::VectorXd g(batch.rows());
  for (int b = 0; b < batch.trajectories(); ++b) {
    double tail = 0.0;
    for (int r = batch.traj_offset[b + 1] - 1; r >= batch.traj_offset[b]; --r) {
      tail += batch.reward(r);
      g(r) = tail;
    }
  }
  return g;
}

Eigen::VectorXd reinforce_advantages(const AgentBatch& batch) {
  Eigen::VectorXd g = returns_to_go(batch);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(batch.horizon + 1);
  Eigen::VectorXd count = Eigen::VectorXd::Zero(batch.horizon + 1);
  for (int r = 0; r < batch.rows(); ++r) {
    sum(batch.stage[r]) += g(r);
    count(batch.stage[r]) += 1.0;
  }
  for (int r = 0; r < batch.rows(); ++r) {
    g(r) -= sum(batch.stage[r]) / count(batch.stage[r]);
  }
  return g;
}

void gae_advantages(const AgentBatch& batch, const PpoSettings& settings,
                    Eigen::VectorXd* advantages, Eigen::VectorXd* returns) {
  advantages->resize(batch.rows());
  returns->resize(batch.rows());
  for (int b = 0; b < batch.trajectories(); ++b) {
    double next_adv = 0.0;
    double next_value = 0.0;  // beyond the horizon (or the exit) lies nothing
    for (int r = batch.traj_offset[b + 1] - 1; r >= batch.traj_offset[b]; --r) {
      const double delta = batch.reward(r) + settings.gamma * next_value -
                           batch.value_old(r);
      next_adv = delta + settings.gamma * settings.gae_lambda * next_adv;
      (*advantages)(r) = next_adv;
      (*returns)(r) = next_adv + batch.value_old(r);
      next_value = batch.value_old(r);
    }
  }
}

double reinforce_loss(const nn::Mlp& actor, const AgentBatch& batch,
                      const Eigen::VectorXd& advantage) {
  const Eigen::MatrixXd out = actor.forward(batch.obs);
  double loss = 0.0;
  for (int r = 0; r < batch.rows(); ++r) {
    const nn::BetaParams params = head_at_col(out, r);
    loss -= nn::beta_log_pdf(params, batch.unit_action(r)) * advantage(r);
  }
  return loss / batch.trajectories();
}

nn::Gradients reinforce_gradient(const nn::Mlp& actor, const AgentBatch& batch,
                                 const Eigen::VectorXd& advantage) {
  const UniqueColumns unique = unique_columns(batch.obs, nullptr);
  const nn::Mlp::Trace trace = actor.forward_trace(unique.cols);
  Eigen::MatrixXd dout = Eigen::MatrixXd::Zero(2, unique.cols.cols());
  const double scale = 1.0 / batch.trajectories();
  for (int r = 0; r < batch.rows(); ++r) {
    const int u = unique.map[r];
    const nn::BetaParams params = head_at_col(trace.out, u);
    double d_alpha, d_beta;
    nn::beta_log_pdf_grad(params, batch.unit_action(r), &d_alpha, &d_beta);
    const double w = -scale * advantage(r);
    dout(0, u) += w * d_alpha * nn::sigmoid(trace.out(0, u));
    dout(1, u) += w * d_beta * nn::sigmoid(trace.out(1, u));
  }
  nn::Gradients grads = actor.zero_gradients();
  actor.backward(trace, dout, &grads);
  return grads;
}

namespace {

// Normalized advantages over a minibatch; degenerate minibatches pass through.
Eigen::VectorXd normalize_advantages(const Eigen::VectorXd& advantage,
                                     const std::vector<int>& index) {
  const int m = static_cast<int>(index.size());
  Eigen::VectorXd picked(m);
  for (int k = 0; k < m; ++k) picked(k) = advantage(index[k]);
  if (m < 2) return picked;
  const double mean = picked.mean();
  const double var = (picked.array() - mean).square().sum() / (m - 1);
  const double std = std::sqrt(var);
  return (picked.array() - mean) / (std + 1e-8);
}

}  // namespace

double ppo_loss(const nn::Mlp& actor, const nn::Mlp& critic,
                const AgentBatch& batch, const Eigen::VectorXd& advantage,
                const Eigen::VectorXd& value_target,
                const std::vector<int>& index, const PpoSettings& settings) {
  const int m = static_cast<int>(index.size());
  Eigen::MatrixXd obs(batch.obs.rows(), m);
  for (int k = 0; k < m; ++k) obs.col(k) = batch.obs.col(index[k]);
  const Eigen::MatrixXd actor_out = actor.forward(obs);
  const Eigen::MatrixXd critic_out = critic.forward(obs);
  const Eigen::VectorXd adv = normalize_advantages(advantage, index);

  double policy_loss = 0.0;
  double value_loss = 0.0;
  for (int k = 0; k < m; ++k) {
    const int r = index[k];
    const nn::BetaParams params = head_at_col(actor_out, k);
    const double logp = nn::beta_log_pdf(params, batch.unit_action(r));
    const double ratio = std::exp(logp - batch.logp_old(r));
    const double clipped =
        std::clamp(ratio, 1.0 - settings.clip, 1.0 + settings.clip);
    policy_loss -= std::min(ratio * adv(k), clipped * adv(k));
    const double verr = critic_out(0, k) - value_target(r);
    value_loss += verr * verr;
  }
  return policy_loss / m + settings.value_coef * value_loss / m;
}

void ppo_gradient(const nn::Mlp& actor, const nn::Mlp& critic,
                  const AgentBatch& batch, const Eigen::VectorXd& advantage,
                  const Eigen::VectorXd& value_target,
                  const std::vector<int>& index, const PpoSettings& settings,
                  nn::Gradients* actor_grads, nn::Gradients* critic_grads) {
  const int m = static_cast<int>(index.size());
  const UniqueColumns unique = unique_columns(batch.obs, &index);
  const nn::Mlp::Trace actor_trace = actor.forward_trace(unique.cols);
  const nn::Mlp::Trace critic_trace = critic.forward_trace(unique.cols);
  const Eigen::VectorXd adv = normalize_advantages(advantage, index);

  Eigen::MatrixXd actor_dout = Eigen::MatrixXd::Zero(2, unique.cols.cols());
  Eigen::MatrixXd critic_dout = Eigen::MatrixXd::Zero(1, unique.cols.cols());
  for (int k = 0; k < m; ++k) {
    const int r = index[k];
    const int u = unique.map[k];
    const nn::BetaParams params = head_at_col(actor_trace.out, u);
    const double x = batch.unit_action(r);
    const double logp = nn::beta_log_pdf(params, x);
    const double ratio = std::exp(logp - batch.logp_old(r));
    const double clipped =
        std::clamp(ratio, 1.0 - settings.clip, 1.0 + settings.clip);
    // min(ratio*adv, clipped*adv): gradient flows only through the unclipped
    // branch when it is the active one.
    if (ratio * adv(k) <= clipped * adv(k)) {
      const double w = -(ratio * adv(k)) / m;  // d/dlogp of -ratio*adv/m
      double d_alpha, d_beta;
      nn::beta_log_pdf_grad(params, x, &d_alpha, &d_beta);
      actor_dout(0, u) += w * d_alpha * nn::sigmoid(actor_trace.out(0, u));
      actor_dout(1, u) += w * d_beta * nn::sigmoid(actor_trace.out(1, u));
    }
    const double verr = critic_trace.out(0, u) - value_target(r);
    critic_dout(0, u) += settings.value_coef * 2.0 * verr / m;
  }
  actor.backward(actor_trace, actor_dout, actor_grads);
  critic.backward(critic_trace, critic_dout, critic_grads);
}

CollectedIteration collect_selfplay(const MarketConfig& config,
                                    const std::vector<nn::Mlp>& actors,
                                    const std::vector<nn::Mlp>* critics,
                                    int trajectories, std::uint64_t seed) {
  const int n = config.n_agents;
  const int horizon = config.horizon;
  const int batch = trajectories;
  const ObservationEncoder encoder = ObservationEncoder::for_config(config);
  const int d = encoder.size();

  // Stage-major scratch, flattened into trajectory-major batches afterwards.
  struct StageData {
    Eigen::MatrixXd obs;
    Eigen::VectorXd x, logp, value, reward;
    std::vector<std::uint8_t> acted;
  };
  std::vector<std::vector<StageData>> data(n);
  for (int i = 0; i < n; ++i) {
    data[i].resize(horizon);
    for (auto& sd : data[i]) {
      sd.obs.setZero(d, batch);
      sd.x.setZero(batch);
      sd.logp.setZero(batch);
      sd.value.setZero(batch);
      sd.reward.setZero(batch);
      sd.acted.assign(batch, 0);
    }
  }

  std::vector<RngStream> streams;
  streams.reserve(batch);
  for (int b = 0; b < batch; ++b) {
    streams.emplace_back(mix_seed(seed, static_cast<std::uint64_t>(b)));
  }

  std::vector<MarketState> states(batch, initial_state(config));
  Eigen::MatrixXd prices(n, batch);
  std::vector<int> live;
  live.reserve(batch);
  std::vector<double> price_scratch(n, 0.0);

  for (int t = 0; t < horizon; ++t) {
    for (int i = 0; i < n; ++i) {
      StageData& sd = data[i][t];
      live.clear();
      for (int b = 0; b < batch; ++b) {
        if (!states[b].active[i]) continue;
        encoder.encode(observe(states[b], config, i), sd.obs.col(b).data());
        live.push_back(b);
        sd.acted[b] = 1;
      }
      if (live.empty()) continue;
      const UniqueColumns unique = unique_columns(sd.obs, &live);
      const Eigen::MatrixXd actor_out = actors[i].forward(unique.cols);
      Eigen::MatrixXd critic_out;
      if (critics) critic_out = (*critics)[i].forward(unique.cols);
      const double lo = config.unit_costs[i];
      const double hi = config.p_max;
      for (std::size_t k = 0; k < live.size(); ++k) {
        const int b = live[k];
        const int u = unique.map[k];
        const nn::BetaParams params = head_at_col(actor_out, u);
        const double x =
            clamp_unit(streams[b].beta(params.alpha, params.beta));
        sd.x(b) = x;
        sd.logp(b) = nn::beta_log_pdf(params, x);
        if (critics) sd.value(b) = critic_out(0, u);
        prices(i, b) = lo + x * (hi - lo);
      }
    }
    for (int b = 0; b < batch; ++b) {
      if (states[b].num_active() == 0) continue;
      for (int i = 0; i < n; ++i) price_scratch[i] = prices(i, b);
      auto [next, outcome] =
          step(states[b], price_scratch, config, AllExitHandling::kDegenerate);
      for (int i = 0; i < n; ++i) {
        if (data[i][t].acted[b]) data[i][t].reward(b) = outcome.rewards[i];
      }
      states[b] = std::move(next);
    }
  }

  CollectedIteration out;
  out.batches.resize(n);
  out.mean_utility.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    AgentBatch& ab = out.batches[i];
    ab.horizon = horizon;
    int rows = 0;
    for (int t = 0; t < horizon; ++t) {
      for (int b = 0; b < batch; ++b) rows += data[i][t].acted[b];
    }
    ab.obs.resize(d, rows);
    ab.unit_action.resize(rows);
    ab.logp_old.resize(rows);
    ab.reward.resize(rows);
    ab.value_old.resize(rows);
    ab.stage.resize(rows);
    ab.traj_offset.assign(batch + 1, 0);
    int r = 0;
    double total = 0.0;
    for (int b = 0; b < batch; ++b) {
      ab.traj_offset[b] = r;
      for (int t = 0; t < horizon; ++t) {
        const StageData& sd = data[i][t];
        if (!sd.acted[b]) break;  // activity is a prefix of the horizon
        ab.obs.col(r) = sd.obs.col(b);
        ab.unit_action(r) = sd.x(b);
        ab.logp_old(r) = sd.logp(b);
        ab.reward(r) = sd.reward(b);
        ab.value_old(r) = sd.value(b);
        ab.stage[r] = t + 1;
        total += sd.reward(b);
        ++r;
      }
    }
    ab.traj_offset[batch] = r;
    out.mean_utility[i] = total / batch;
  }
  return out;
}

LearnedProfile train_selfplay(const MarketConfig& config, Algo algo,
                              const TrainConfig& tc, const PolicySpec& spec,
                              const TrainCallbacks& callbacks) {
  if (tc.iterations < 1 || tc.trajectories_per_iteration < 1 ||
      tc.learning_rate <= 0.0) {
    throw Error(ErrorCode::kConfigInvalid, "train config counts and learning "
                                           "rate must be positive");
  }
  const int n = config.n_agents;
  const ObservationEncoder encoder = ObservationEncoder::for_config(config);
  const PpoSettings ppo;

  std::vector<nn::Mlp> actors, critics;
  std::vector<nn::Adam> actor_opt, critic_opt;
  for (int i = 0; i < n; ++i) {
    actors.emplace_back(spec.actor_sizes(encoder.size()),
                        mix_seed(tc.seed, 0xA0ULL, static_cast<std::uint64_t>(i)));
    actor_opt.emplace_back(actors.back());
    if (algo == Algo::kPpo) {
      critics.emplace_back(
          spec.critic_sizes(encoder.size()),
          mix_seed(tc.seed, 0xC0ULL, static_cast<std::uint64_t>(i)));
      critic_opt.emplace_back(critics.back());
    }
  }

  LearnedProfile profile;
  profile.config = config;
  profile.algo = algo;
  profile.spec = spec;

  for (int iter = 1; iter <= tc.iterations; ++iter) {
    const double lr = tc.lr_at(iter);
    CollectedIteration collected = collect_selfplay(
        config, actors, algo == Algo::kPpo ? &critics : nullptr,
        tc.trajectories_per_iteration,
        mix_seed(tc.seed, 0x17e2ULL, static_cast<std::uint64_t>(iter)));

    std::vector<TrainingLogEntry> entries;
    for (int i = 0; i < n; ++i) {
      if (!std::isfinite(collected.mean_utility[i])) {
        throw Error(ErrorCode::kDivergedTraining,
                    "agent " + std::to_string(i) +
                        " mean utility is not finite at iteration " +
                        std::to_string(iter));
      }
      entries.push_back({iter, i, collected.mean_utility[i], lr});
    }

    // All agents update from batches collected against pre-update opponents.
    for (int i = 0; i < n; ++i) {
      AgentBatch& batch = collected.batches[i];
      if (algo == Algo::kReinforce) {
        const Eigen::VectorXd advantage = reinforce_advantages(batch);
        const nn::Gradients grads =
            reinforce_gradient(actors[i], batch, advantage);
        actor_opt[i].step(&actors[i], grads, lr);
      } else {
        Eigen::VectorXd advantage, value_target;
        gae_advantages(batch, ppo, &advantage, &value_target);
        std::vector<int> order(batch.rows());
        std::iota(order.begin(), order.end(), 0);
        std::mt19937_64 shuffle_rng(mix_seed(tc.seed, 0x54aFULL,
                                             static_cast<std::uint64_t>(iter),
                                             static_cast<std::uint64_t>(i)));
        for (int epoch = 0; epoch < ppo.epochs; ++epoch) {
          std::shuffle(order.begin(), order.end(), shuffle_rng);
          for (int start = 0; start < batch.rows(); start += ppo.minibatch) {
            const int stop = std::min(start + ppo.minibatch, batch.rows());
            const std::vector<int> index(order.begin() + start,
                                         order.begin() + stop);
            nn::Gradients actor_grads = actors[i].zero_gradients();
            nn::Gradients critic_grads = critics[i].zero_gradients();
            ppo_gradient(actors[i], critics[i], batch, advantage, value_target,
                         index, ppo, &actor_grads, &critic_grads);
            actor_opt[i].step(&actors[i], actor_grads, lr);
            critic_opt[i].step(&critics[i], critic_grads, lr);
          }
        }
      }
    }

    profile.log.insert(profile.log.end(), entries.begin(), entries.end());
    if (callbacks.on_iteration) callbacks.on_iteration(callbacks.ctx, entries);
  }

  profile.actors = std::move(actors);
  return profile;
}

}  // namespace oligo
