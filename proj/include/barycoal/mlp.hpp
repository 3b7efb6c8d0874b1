// Copyright 2026 The barycoal Authors
// SPDX-License-Identifier: Apache-2.0
//
// Fully connected networks on top of the autodiff graph, the Adam optimizer
// and the WGAN-GP gradient penalty.

#pragma once

#include "barycoal/autodiff.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace barycoal {

using Rng = std::mt19937_64;

enum class Activation { ReLU, LeakyReLU, Tanh, Identity };

inline constexpr double kLeakySlope = 0.2;

std::string activation_name(Activation a);
Activation parse_activation(const std::string& name);

struct DenseLayer {
  ad::Tensor weight;  // out x in
  ad::Tensor bias;    // 1 x out
  Activation activation;
};

// Value semantics: copies are deep and get fresh graph leaves.
class MLPParams {
 public:
  MLPParams() = default;
  MLPParams(const MLPParams& other);
  MLPParams& operator=(const MLPParams& other);
  MLPParams(MLPParams&&) = default;
  MLPParams& operator=(MLPParams&&) = default;

  // He-style uniform init U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero biases.
  // sizes = {in, h1, ..., out}; one activation per layer.
  static MLPParams init(const std::vector<int>& sizes, const std::vector<Activation>& activations, Rng& rng);
  // Layers from explicit matrices (weights out x in, biases 1 x out).
  static MLPParams from_matrices(const std::vector<Eigen::MatrixXd>& weights,
                                 const std::vector<Eigen::MatrixXd>& biases,
                                 const std::vector<Activation>& activations);

  std::vector<DenseLayer> layers;

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::vector<ad::Tensor> parameters() const;  // W1, b1, W2, b2, ...
  void zero_grad();
  std::size_t num_parameters() const;
  std::uint64_t content_hash() const;  // FNV-1a over the raw parameter bytes
};

// Weight override: when non-null, layer l uses (*weights)[l] in place of
// layers[l].weight (e.g. quantized weights). Biases are always the stored ones.
using WeightOverride = std::vector<ad::Tensor>;

ad::Tensor apply_activation(const ad::Tensor& x, Activation a);
ad::Tensor forward(const MLPParams& model, const ad::Tensor& input, const WeightOverride* weights = nullptr);
// Graph-free evaluation.
Eigen::MatrixXd evaluate(const MLPParams& model, const Eigen::MatrixXd& input);
Eigen::MatrixXd evaluate(const MLPParams& model, const Eigen::MatrixXd& input,
                         const std::vector<Eigen::MatrixXd>& weights);

// d(sum of outputs)/d(input) as a differentiable graph; requires a scalar
// output network. Shape n x input_dim.
ad::Tensor input_gradient(const MLPParams& model, const ad::Tensor& input,
                          const WeightOverride* weights = nullptr);

// coefficient * mean((||grad critic(x_hat)|| - 1)^2) with
// x_hat = u * real + (1 - u) * fake, u ~ U[0,1] per row.
ad::Tensor gradient_penalty(const MLPParams& critic, const Eigen::MatrixXd& real, const Eigen::MatrixXd& fake,
                            double coefficient, Rng& rng, const WeightOverride* weights = nullptr);

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<Eigen::MatrixXd> m;
  std::vector<Eigen::MatrixXd> v;
  long step = 0;

  AdamState() = default;
  AdamState(const std::vector<ad::Tensor>& params, AdamConfig cfg);
};

// Bias-corrected Adam on explicit values/gradients. Throws on shape mismatch.
void adam_update(std::vector<Eigen::MatrixXd*> values, const std::vector<Eigen::MatrixXd>& grads,
                 AdamState& state);
// Uses the gradients stored on the parameter tensors.
void adam_step(MLPParams& model, AdamState& state);

}  // namespace barycoal
