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

#ifndef OLIGO_NN_HPP_
#define OLIGO_NN_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace oligo::nn {

double selu(double x);
double selu_grad(double x);
double softplus(double x);
double sigmoid(double x);
double digamma(double x);

struct Layer {
  Eigen::MatrixXd w;  // out x in
  Eigen::VectorXd b;
};

using Gradients = std::vector<Layer>;

// Fully connected network, SeLU hidden activations, linear output head.
// Samples are columns. Deterministic given the init seed.
class Mlp {
 public:
  Mlp() = default;
  // sizes = {input, hidden..., output}; LeCun-normal weights, zero biases.
  Mlp(std::vector<int> sizes, std::uint64_t seed);

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  const std::vector<int>& sizes() const { return sizes_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& mutable_layers() { return layers_; }

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;

  struct Trace {
    std::vector<Eigen::MatrixXd> inputs;  // layer inputs (first is x)
    std::vector<Eigen::MatrixXd> pre;     // pre-activations per hidden layer
    Eigen::MatrixXd out;
  };
  Trace forward_trace(const Eigen::MatrixXd& x) const;

  // Accumulates dLoss/dparams into `grads` given dLoss/dout.
  void backward(const Trace& trace, const Eigen::MatrixXd& dout,
                Gradients* grads) const;

  // Allocation-free single-sample forward; scratch needs 2 * max layer width.
  void forward_single(const double* in, double* out, double* scratch) const;
  int scratch_size() const;

  Gradients zero_gradients() const;

  int parameter_count() const;
  std::vector<double> flatten() const;
  void load_flat(const std::vector<double>& flat);

 private:
  std::vector<int> sizes_;
  std::vector<Layer> layers_;
};

class Adam {
 public:
  Adam() = default;
  explicit Adam(const Mlp& net);

  // Descends `net` along `grads` (gradients of a loss) with step size lr.
  void step(Mlp* net, const Gradients& grads, double lr);

 private:
  Gradients m_, v_;
  int t_ = 0;
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
};

// Beta distribution head with the softplus-plus-one transform: both shape
// parameters stay strictly above 1, so the density is unimodal with an
// interior mode.
struct BetaParams {
  double alpha = 0.0;
  double beta = 0.0;
};

BetaParams beta_head(double z_alpha, double z_beta);
double beta_mode(const BetaParams& p);
double beta_log_pdf(const BetaParams& p, double x);
// d log pdf / d alpha and / d beta at x.
void beta_log_pdf_grad(const BetaParams& p, double x, double* d_alpha,
                       double* d_beta);

}  // namespace oligo::nn

#endif  // OLIGO_NN_HPP_
