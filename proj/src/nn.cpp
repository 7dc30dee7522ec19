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

#include "oligo/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "oligo/rng.hpp"

namespace oligo::nn {

namespace {
constexpr double kSeluLambda = 1.0507009873554804934193349852946;
constexpr double kSeluAlpha = 1.6732632423543772848170429916717;
}  // namespace

double selu(double x) {
  return x > 0.0 ? kSeluLambda * x : kSeluLambda * kSeluAlpha * std::expm1(x);
}

double selu_grad(double x) {
  return x > 0.0 ? kSeluLambda : kSeluLambda * kSeluAlpha * std::exp(x);
}

double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double digamma(double x) {
  // Recurrence into the asymptotic regime, then the Bernoulli series up to
  // the x^-8 term; absolute error below 1e-11 for the shifted argument.
  double result = 0.0;
  while (x < 8.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 -
                    inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)));
  return result;
}

Mlp::Mlp(std::vector<int> sizes, std::uint64_t seed) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) {
    throw std::invalid_argument("Mlp needs at least input and output sizes");
  }
  RngStream stream(mix_seed(seed, 0x6e6eULL));
  layers_.reserve(sizes_.size() - 1);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    Layer layer;
    const int fan_in = sizes_[l];
    const int fan_out = sizes_[l + 1];
    layer.w.resize(fan_out, fan_in);
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) {
        layer.w(r, c) = scale * stream.normal();
      }
    }
    layer.b = Eigen::VectorXd::Zero(fan_out);
    layers_.push_back(std::move(layer));
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::MatrixXd z = (layers_[l].w * a).colwise() + layers_[l].b;
    if (l + 1 < layers_.size()) {
      a = z.unaryExpr([](double v) { return selu(v); });
    } else {
      a = std::move(z);
    }
  }
  return a;
}

Mlp::Trace Mlp::forward_trace(const Eigen::MatrixXd& x) const {
  Trace trace;
  trace.inputs.reserve(layers_.size());
  trace.pre.reserve(layers_.size() - 1);
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    trace.inputs.push_back(a);
    Eigen::MatrixXd z = (layers_[l].w * a).colwise() + layers_[l].b;
    if (l + 1 < layers_.size()) {
      trace.pre.push_back(z);
      a = z.unaryExpr([](double v) { return selu(v); });
    } else {
      trace.out = std::move(z);
    }
  }
  return trace;
}

void Mlp::backward(const Trace& trace, const Eigen::MatrixXd& dout,
                   Gradients* grads) const {
  Eigen::MatrixXd delta = dout;
  for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
    (*grads)[l].w.noalias() += delta * trace.inputs[l].transpose();
    (*grads)[l].b.noalias() += delta.rowwise().sum();
    if (l > 0) {
      delta = (layers_[l].w.transpose() * delta).eval();
      delta.array() *=
          trace.pre[l - 1].unaryExpr([](double v) { return selu_grad(v); }).array();
    }
  }
}

void Mlp::forward_single(const double* in, double* out, double* scratch) const {
  const int max_width = scratch_size() / 2;
  double* cur = scratch;
  double* next = scratch + max_width;
  for (int i = 0; i < sizes_.front(); ++i) cur[i] = in[i];
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    const int rows = static_cast<int>(layer.w.rows());
    const int cols = static_cast<int>(layer.w.cols());
    const bool last = (l + 1 == layers_.size());
    for (int r = 0; r < rows; ++r) {
      double acc = layer.b(r);
      const double* wrow = layer.w.data() + r;  // column-major stride
      for (int c = 0; c < cols; ++c) acc += wrow[static_cast<std::ptrdiff_t>(c) * rows] * cur[c];
      next[r] = last ? acc : selu(acc);
    }
    std::swap(cur, next);
  }
  for (int i = 0; i < sizes_.back(); ++i) out[i] = cur[i];
}

int Mlp::scratch_size() const {
  int max_width = 0;
  for (int s : sizes_) max_width = std::max(max_width, s);
  return 2 * max_width;
}

Gradients Mlp::zero_gradients() const {
  Gradients grads;
  grads.reserve(layers_.size());
  for (const Layer& layer : layers_) {
    grads.push_back({Eigen::MatrixXd::Zero(layer.w.rows(), layer.w.cols()),
                     Eigen::VectorXd::Zero(layer.b.size())});
  }
  return grads;
}

int Mlp::parameter_count() const {
  int count = 0;
  for (const Layer& layer : layers_) {
    count += static_cast<int>(layer.w.size() + layer.b.size());
  }
  return count;
}

std::vector<double> Mlp::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const Layer& layer : layers_) {
    flat.insert(flat.end(), layer.w.data(), layer.w.data() + layer.w.size());
    flat.insert(flat.end(), layer.b.data(), layer.b.data() + layer.b.size());
  }
  return flat;
}

void Mlp::load_flat(const std::vector<double>& flat) {
  if (static_cast<int>(flat.size()) != parameter_count()) {
    throw std::invalid_argument("flat parameter size mismatch");
  }
  std::size_t pos = 0;
  for (Layer& layer : layers_) {
    std::copy(flat.begin() + pos, flat.begin() + pos + layer.w.size(),
              layer.w.data());
    pos += layer.w.size();
    std::copy(flat.begin() + pos, flat.begin() + pos + layer.b.size(),
              layer.b.data());
    pos += layer.b.size();
  }
}

Adam::Adam(const Mlp& net) : m_(net.zero_gradients()), v_(net.zero_gradients()) {}

void Adam::step(Mlp* net, const Gradients& grads, double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(kBeta1, t_);
  const double bc2 = 1.0 - std::pow(kBeta2, t_);
  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    m = kBeta1 * m + (1.0 - kBeta1) * g;
    v = kBeta2 * v + (1.0 - kBeta2) * g.cwiseProduct(g);
    p.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + kEps);
  };
  auto& layers = net->mutable_layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    update(layers[l].w, grads[l].w, m_[l].w, v_[l].w);
    update(layers[l].b, grads[l].b, m_[l].b, v_[l].b);
  }
}

BetaParams beta_head(double z_alpha, double z_beta) {
  // The 1e-6 floor keeps both parameters strictly above 1 even where
  // softplus underflows, so the mode stays well defined.
  constexpr double kFloor = 1e-6;
  return {1.0 + kFloor + softplus(z_alpha), 1.0 + kFloor + softplus(z_beta)};
}

double beta_mode(const BetaParams& p) {
  return (p.alpha - 1.0) / (p.alpha + p.beta - 2.0);
}

double beta_log_pdf(const BetaParams& p, double x) {
  return (p.alpha - 1.0) * std::log(x) + (p.beta - 1.0) * std::log1p(-x) +
         std::lgamma(p.alpha + p.beta) - std::lgamma(p.alpha) -
         std::lgamma(p.beta);
}

void beta_log_pdf_grad(const BetaParams& p, double x, double* d_alpha,
                       double* d_beta) {
  const double psi_sum = digamma(p.alpha + p.beta);
  *d_alpha = std::log(x) - digamma(p.alpha) + psi_sum;
  *d_beta = std::log1p(-x) - digamma(p.beta) + psi_sum;
}

}  // namespace oligo::nn
