#pragma once

#include <Eigen/Dense>
#include <random>
#include <string>
#include <vector>

namespace vibrom {

enum class Activation { Identity, Tanh, Sigmoid };

Activation activation_from_string(const std::string& name);
std::string activation_name(Activation act);

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
  Activation act = Activation::Tanh;
};

// Cached per-layer values of one forward pass (batch columns).
struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;       // input of each layer
  std::vector<Eigen::MatrixXd> activations;  // post-activation of each layer
};

struct MlpGradient {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;
};

struct Mlp {
  std::vector<DenseLayer> layers;

  int input_dim() const { return static_cast<int>(layers.front().weight.cols()); }
  int output_dim() const { return static_cast<int>(layers.back().weight.rows()); }

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, ForwardCache& cache) const;

  // Backpropagates dL/d(output); returns dL/d(input) and accumulates
  // parameter gradients into grad.
  Eigen::MatrixXd backward(const ForwardCache& cache, const Eigen::MatrixXd& d_out,
                           MlpGradient& grad) const;

  MlpGradient zero_gradient() const;
};

// Layer sizes [in, h1, ..., out]; hidden layers use `act`, the last layer
// is linear. Glorot-uniform initialization from rng.
Mlp make_mlp(const std::vector<int>& sizes, Activation act, std::mt19937_64& rng);

// Adam state over one Mlp's parameters.
struct AdamState {
  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::VectorXd> mb, vb;
  long step = 0;

  explicit AdamState(const Mlp& net);
  void update(Mlp& net, const MlpGradient& grad, double lr,
              double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
};

}  // namespace vibrom
