#include "vibrom/net.hpp"

#include <cmath>
#include <stdexcept>

namespace vibrom {

Activation activation_from_string(const std::string& name) {
  if (name == "identity" || name == "linear") return Activation::Identity;
  if (name == "tanh") return Activation::Tanh;
  if (name == "sigmoid") return Activation::Sigmoid;
  throw std::invalid_argument("unknown activation: " + name);
}

std::string activation_name(Activation act) {
  switch (act) {
    case Activation::Identity: return "identity";
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
  }
  return "?";
}

namespace {

Eigen::MatrixXd apply_activation(Activation act, const Eigen::MatrixXd& z) {
  switch (act) {
    case Activation::Identity: return z;
    case Activation::Tanh: return z.array().tanh();
    case Activation::Sigmoid: return (1.0 / (1.0 + (-z.array()).exp())).matrix();
  }
  return z;
}

// derivative expressed through the activation value
Eigen::MatrixXd activation_derivative(Activation act, const Eigen::MatrixXd& a) {
  switch (act) {
    case Activation::Identity: return Eigen::MatrixXd::Ones(a.rows(), a.cols());
    case Activation::Tanh: return (1.0 - a.array().square()).matrix();
    case Activation::Sigmoid: return (a.array() * (1.0 - a.array())).matrix();
  }
  return a;
}

}  // namespace

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd h = x;
  for (const DenseLayer& l : layers)
    h = apply_activation(l.act, (l.weight * h).colwise() + l.bias);
  return h;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, ForwardCache& cache) const {
  cache.inputs.clear();
  cache.activations.clear();
  Eigen::MatrixXd h = x;
  for (const DenseLayer& l : layers) {
    cache.inputs.push_back(h);
    h = apply_activation(l.act, (l.weight * h).colwise() + l.bias);
    cache.activations.push_back(h);
  }
  return h;
}

Eigen::MatrixXd Mlp::backward(const ForwardCache& cache, const Eigen::MatrixXd& d_out,
                              MlpGradient& grad) const {
  Eigen::MatrixXd delta = d_out;
  for (int i = static_cast<int>(layers.size()) - 1; i >= 0; --i) {
    const DenseLayer& l = layers[i];
    Eigen::MatrixXd dz =
        delta.cwiseProduct(activation_derivative(l.act, cache.activations[i]));
    grad.weight[i] += dz * cache.inputs[i].transpose();
    grad.bias[i] += dz.rowwise().sum();
    delta = l.weight.transpose() * dz;
  }
  return delta;
}

MlpGradient Mlp::zero_gradient() const {
  MlpGradient g;
  for (const DenseLayer& l : layers) {
    g.weight.emplace_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
    g.bias.emplace_back(Eigen::VectorXd::Zero(l.bias.size()));
  }
  return g;
}

Mlp make_mlp(const std::vector<int>& sizes, Activation act, std::mt19937_64& rng) {
  if (sizes.size() < 2) throw std::invalid_argument("make_mlp: need at least 2 sizes");
  Mlp net;
  for (size_t i = 0; i + 1 < sizes.size(); ++i) {
    DenseLayer l;
    int fan_in = sizes[i], fan_out = sizes[i + 1];
    double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> u(-bound, bound);
    l.weight.resize(fan_out, fan_in);
    for (int c = 0; c < fan_in; ++c)
      for (int r = 0; r < fan_out; ++r) l.weight(r, c) = u(rng);
    l.bias = Eigen::VectorXd::Zero(fan_out);
    l.act = (i + 2 == sizes.size()) ? Activation::Identity : act;
    net.layers.push_back(std::move(l));
  }
  return net;
}

AdamState::AdamState(const Mlp& net) {
  for (const DenseLayer& l : net.layers) {
    mw.emplace_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
    vw.emplace_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
    mb.emplace_back(Eigen::VectorXd::Zero(l.bias.size()));
    vb.emplace_back(Eigen::VectorXd::Zero(l.bias.size()));
  }
}

void AdamState::update(Mlp& net, const MlpGradient& grad, double lr,
                       double beta1, double beta2, double eps) {
  ++step;
  double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  for (size_t i = 0; i < net.layers.size(); ++i) {
    mw[i] = beta1 * mw[i] + (1.0 - beta1) * grad.weight[i];
    vw[i] = beta2 * vw[i].array().matrix() +
            (1.0 - beta2) * grad.weight[i].array().square().matrix();
    net.layers[i].weight.array() -=
        lr * (mw[i].array() / c1) / ((vw[i].array() / c2).sqrt() + eps);

    mb[i] = beta1 * mb[i] + (1.0 - beta1) * grad.bias[i];
    vb[i] = beta2 * vb[i].array().matrix() +
            (1.0 - beta2) * grad.bias[i].array().square().matrix();
    net.layers[i].bias.array() -=
        lr * (mb[i].array() / c1) / ((vb[i].array() / c2).sqrt() + eps);
  }
}

}  // namespace vibrom
