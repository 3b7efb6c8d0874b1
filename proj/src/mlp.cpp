// Copyright 2026 The barycoal Authors
// SPDX-License-Identifier: Apache-2.0

#include "barycoal/mlp.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace barycoal {

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::ReLU: return "relu";
    case Activation::LeakyReLU: return "leaky_relu";
    case Activation::Tanh: return "tanh";
    case Activation::Identity: return "identity";
  }
  return "identity";
}

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::ReLU;
  if (name == "leaky_relu") return Activation::LeakyReLU;
  if (name == "tanh") return Activation::Tanh;
  if (name == "identity") return Activation::Identity;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

MLPParams::MLPParams(const MLPParams& other) {
  layers.reserve(other.layers.size());
  for (const auto& l : other.layers) {
    layers.push_back({ad::parameter(l.weight.value()), ad::parameter(l.bias.value()), l.activation});
  }
}

MLPParams& MLPParams::operator=(const MLPParams& other) {
  if (this != &other) {
    MLPParams copy(other);
    layers = std::move(copy.layers);
  }
  return *this;
}

MLPParams MLPParams::init(const std::vector<int>& sizes, const std::vector<Activation>& activations, Rng& rng) {
  if (sizes.size() < 2 || activations.size() != sizes.size() - 1) {
    throw std::invalid_argument("MLPParams::init: need one activation per layer");
  }
  MLPParams p;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int fan_in = sizes[l];
    const int fan_out = sizes[l + 1];
    if (fan_in <= 0 || fan_out <= 0) throw std::invalid_argument("MLPParams::init: layer sizes must be positive");
    const double bound = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> u(-bound, bound);
    Eigen::MatrixXd w(fan_out, fan_in);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = u(rng);
    }
    p.layers.push_back({ad::parameter(std::move(w)), ad::parameter(Eigen::MatrixXd::Zero(1, fan_out)),
                        activations[l]});
  }
  return p;
}

MLPParams MLPParams::from_matrices(const std::vector<Eigen::MatrixXd>& weights,
                                   const std::vector<Eigen::MatrixXd>& biases,
                                   const std::vector<Activation>& activations) {
  if (weights.empty() || weights.size() != biases.size() || weights.size() != activations.size()) {
    throw std::invalid_argument("MLPParams::from_matrices: inconsistent layer counts");
  }
  MLPParams p;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (biases[l].rows() != 1 || biases[l].cols() != weights[l].rows()) {
      throw std::invalid_argument("MLPParams::from_matrices: bias shape mismatch at layer " + std::to_string(l));
    }
    if (l > 0 && weights[l].cols() != weights[l - 1].rows()) {
      throw std::invalid_argument("MLPParams::from_matrices: layer dimensions do not chain at layer " +
                                  std::to_string(l));
    }
    p.layers.push_back({ad::parameter(weights[l]), ad::parameter(biases[l]), activations[l]});
  }
  return p;
}

std::size_t MLPParams::input_dim() const {
  return layers.empty() ? 0 : static_cast<std::size_t>(layers.front().weight.cols());
}

std::size_t MLPParams::output_dim() const {
  return layers.empty() ? 0 : static_cast<std::size_t>(layers.back().weight.rows());
}

std::vector<ad::Tensor> MLPParams::parameters() const {
  std::vector<ad::Tensor> out;
  for (const auto& l : layers) {
    out.push_back(l.weight);
    out.push_back(l.bias);
  }
  return out;
}

void MLPParams::zero_grad() {
  for (auto& l : layers) {
    l.weight.zero_grad();
    l.bias.zero_grad();
  }
}

std::size_t MLPParams::num_parameters() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.value().size() + l.bias.value().size());
  return n;
}

std::uint64_t MLPParams::content_hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const Eigen::MatrixXd& m) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(m.data());
    for (std::size_t i = 0; i < static_cast<std::size_t>(m.size()) * sizeof(double); ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& l : layers) {
    mix(l.weight.value());
    mix(l.bias.value());
  }
  return h;
}

ad::Tensor apply_activation(const ad::Tensor& x, Activation a) {
  switch (a) {
    case Activation::ReLU: return ad::relu(x);
    case Activation::LeakyReLU: return ad::leaky_relu(x, kLeakySlope);
    case Activation::Tanh: return ad::tanh(x);
    case Activation::Identity: return x;
  }
  return x;
}

namespace {

const ad::Tensor& layer_weight(const MLPParams& model, const WeightOverride* weights, std::size_t l) {
  if (weights == nullptr) return model.layers[l].weight;
  if (weights->size() != model.layers.size()) throw std::invalid_argument("weight override: wrong layer count");
  const ad::Tensor& w = (*weights)[l];
  if (w.rows() != model.layers[l].weight.rows() || w.cols() != model.layers[l].weight.cols()) {
    throw std::invalid_argument("weight override: shape mismatch at layer " + std::to_string(l));
  }
  return w;
}

void check_input(const MLPParams& model, Eigen::Index cols) {
  if (model.layers.empty()) throw std::invalid_argument("forward: empty network");
  if (static_cast<std::size_t>(cols) != model.input_dim()) {
    throw std::invalid_argument("forward: input has " + std::to_string(cols) + " columns, network expects " +
                                std::to_string(model.input_dim()));
  }
}

Eigen::MatrixXd activate(Eigen::MatrixXd x, Activation a) {
  switch (a) {
    case Activation::ReLU: return x.cwiseMax(0.0);
    case Activation::LeakyReLU: return (x.array() > 0.0).select(x, kLeakySlope * x);
    case Activation::Tanh: return x.array().tanh().matrix();
    case Activation::Identity: return x;
  }
  return x;
}

// Derivative of the activation at pre-activation `pre`. Tanh keeps its
// dependence on `pre` in the graph; the piecewise-linear ones are constant.
ad::Tensor activation_derivative(const ad::Tensor& pre, const ad::Tensor& post, Activation a) {
  const Eigen::MatrixXd& x = pre.value();
  switch (a) {
    case Activation::ReLU: return ad::constant((x.array() > 0.0).cast<double>().matrix());
    case Activation::LeakyReLU:
      return ad::constant((x.array() > 0.0).select(Eigen::MatrixXd::Ones(x.rows(), x.cols()),
                                                   Eigen::MatrixXd::Constant(x.rows(), x.cols(), kLeakySlope)));
    case Activation::Tanh: return ad::add_scalar(ad::scale(ad::square(post), -1.0), 1.0);
    case Activation::Identity: return ad::constant(Eigen::MatrixXd::Ones(x.rows(), x.cols()));
  }
  return ad::constant(Eigen::MatrixXd::Ones(x.rows(), x.cols()));
}

}  // namespace

ad::Tensor forward(const MLPParams& model, const ad::Tensor& input, const WeightOverride* weights) {
  check_input(model, input.cols());
  ad::Tensor h = input;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    h = apply_activation(ad::add_row(ad::matmul_bt(h, layer_weight(model, weights, l)), layer.bias),
                         layer.activation);
  }
  return h;
}

Eigen::MatrixXd evaluate(const MLPParams& model, const Eigen::MatrixXd& input) {
  check_input(model, input.cols());
  Eigen::MatrixXd h = input;
  for (const auto& layer : model.layers) {
    Eigen::MatrixXd pre = h * layer.weight.value().transpose();
    pre.rowwise() += layer.bias.value().row(0);
    h = activate(std::move(pre), layer.activation);
  }
  return h;
}

Eigen::MatrixXd evaluate(const MLPParams& model, const Eigen::MatrixXd& input,
                         const std::vector<Eigen::MatrixXd>& weights) {
  check_input(model, input.cols());
  if (weights.size() != model.layers.size()) throw std::invalid_argument("evaluate: wrong layer count");
  Eigen::MatrixXd h = input;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    Eigen::MatrixXd pre = h * weights[l].transpose();
    pre.rowwise() += model.layers[l].bias.value().row(0);
    h = activate(std::move(pre), model.layers[l].activation);
  }
  return h;
}

ad::Tensor input_gradient(const MLPParams& model, const ad::Tensor& input, const WeightOverride* weights) {
  check_input(model, input.cols());
  if (model.output_dim() != 1) throw std::invalid_argument("input_gradient: network output must be scalar");
  const std::size_t L = model.layers.size();
  std::vector<ad::Tensor> pre(L);
  std::vector<ad::Tensor> post(L);
  ad::Tensor h = input;
  for (std::size_t l = 0; l < L; ++l) {
    pre[l] = ad::add_row(ad::matmul_bt(h, layer_weight(model, weights, l)), model.layers[l].bias);
    post[l] = apply_activation(pre[l], model.layers[l].activation);
    h = post[l];
  }
  ad::Tensor g = ad::constant(Eigen::MatrixXd::Ones(input.rows(), 1));
  for (std::size_t l = L; l-- > 0;) {
    g = ad::mul(g, activation_derivative(pre[l], post[l], model.layers[l].activation));
    g = ad::matmul(g, layer_weight(model, weights, l));
  }
  return g;
}

ad::Tensor gradient_penalty(const MLPParams& critic, const Eigen::MatrixXd& real, const Eigen::MatrixXd& fake,
                            double coefficient, Rng& rng, const WeightOverride* weights) {
  if (real.rows() != fake.rows() || real.cols() != fake.cols()) {
    throw std::invalid_argument("gradient_penalty: real and fake batches differ in shape");
  }
  if (coefficient < 0.0) throw std::invalid_argument("gradient_penalty: negative coefficient");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXd x_hat(real.rows(), real.cols());
  for (Eigen::Index i = 0; i < real.rows(); ++i) {
    const double u = unif(rng);
    x_hat.row(i) = u * real.row(i) + (1.0 - u) * fake.row(i);
  }
  const ad::Tensor g = input_gradient(critic, ad::constant(std::move(x_hat)), weights);
  return ad::scale(ad::mean(ad::square(ad::add_scalar(ad::row_norm(g), -1.0))), coefficient);
}

AdamState::AdamState(const std::vector<ad::Tensor>& params, AdamConfig cfg) : config(cfg) {
  for (const auto& p : params) {
    m.push_back(Eigen::MatrixXd::Zero(p.rows(), p.cols()));
    v.push_back(Eigen::MatrixXd::Zero(p.rows(), p.cols()));
  }
}

void adam_update(std::vector<Eigen::MatrixXd*> values, const std::vector<Eigen::MatrixXd>& grads,
                 AdamState& state) {
  if (values.size() != grads.size() || values.size() != state.m.size()) {
    throw std::invalid_argument("adam_update: parameter/gradient/state counts differ");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i]->rows() != grads[i].rows() || values[i]->cols() != grads[i].cols() ||
        state.m[i].rows() != grads[i].rows() || state.m[i].cols() != grads[i].cols()) {
      throw std::invalid_argument("adam_update: shape mismatch at parameter " + std::to_string(i));
    }
  }
  ++state.step;
  const AdamConfig& c = state.config;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < values.size(); ++i) {
    state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * grads[i];
    state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * grads[i].cwiseAbs2();
    *values[i] -= (c.learning_rate * (state.m[i].array() / bc1) /
                   ((state.v[i].array() / bc2).sqrt() + c.epsilon))
                      .matrix();
  }
}

void adam_step(MLPParams& model, AdamState& state) {
  std::vector<Eigen::MatrixXd*> values;
  std::vector<Eigen::MatrixXd> grads;
  for (auto& p : model.parameters()) {
    values.push_back(&p.mutable_value());
    grads.push_back(p.grad());
  }
  adam_update(std::move(values), grads, state);
}

}  // namespace barycoal
