// Copyright 2026 The barycoal Authors
// SPDX-License-Identifier: Apache-2.0
//
// Ternary weight quantization w' = S * Tern(w, Delta) with a symmetric
// per-layer threshold Delta and the survivor-mean scale
//
//   S(Delta) = mean{ |w_i| : |w_i| > Delta }.
//
// The forward pass is the hard quantizer. Weights receive straight-through
// gradients; Delta receives the gradient of a smoothed surrogate in which the
// indicator |w_i| > Delta is replaced by sigmoid((|w_i| - Delta) / tau).

#pragma once

#include "barycoal/adversarial.hpp"

#include <functional>
#include <string>
#include <vector>

namespace barycoal {

struct TernaryLayerState {
  Eigen::MatrixXd weights;  // full precision
  double delta = 0.0;
  double scale = 0.0;  // cached S(delta); 0 when no weight survives

  // Recomputes the cached scale. Returns false for a degenerate layer.
  bool refresh();
};

struct TernaryResult {
  Eigen::MatrixXd values;  // entries in {-scale, 0, +scale}
  double scale = 0.0;
  bool degenerate = false;
};

TernaryResult ternarize(const Eigen::MatrixXd& w, double delta);
// Refreshes the state's cached scale and quantizes; degenerate layers go
// through warn().
Eigen::MatrixXd ternarize_layer(TernaryLayerState& state);

// Warning sink for degenerate layers; defaults to stderr. Set once at startup.
void set_warning_handler(std::function<void(const std::string&)> handler);
void warn(const std::string& message);

inline constexpr double kSurrogateWidthFraction = 0.05;

// Smoothed surrogate w~'(Delta) and its Delta-gradient contracted with an
// upstream gradient g: sum_i g_i * d w~'_i / d Delta.
Eigen::MatrixXd surrogate_ternary(const Eigen::MatrixXd& w, double delta, double tau);
double surrogate_delta_gradient(const Eigen::MatrixXd& w, double delta, double tau, const Eigen::MatrixXd& g);

// Graph op: hard ternary value, straight-through gradient to w (masked to
// |w| <= max|w|), surrogate gradient to delta (a 1 x 1 tensor).
ad::Tensor ternary_weight(const ad::Tensor& w, const ad::Tensor& delta,
                          double width_fraction = kSurrogateWidthFraction);

// A network whose weight matrices are used only through their ternarization.
class TernaryNetwork {
 public:
  TernaryNetwork() = default;
  // Delta_l starts at init_fraction * mean|w_l|.
  TernaryNetwork(const MLPParams& full_precision, double init_fraction);
  TernaryNetwork(const TernaryNetwork& other);
  TernaryNetwork& operator=(const TernaryNetwork& other);
  TernaryNetwork(TernaryNetwork&&) = default;
  TernaryNetwork& operator=(TernaryNetwork&&) = default;

  MLPParams params;                // full-precision weights and biases
  std::vector<ad::Tensor> deltas;  // one 1 x 1 leaf per layer
  std::vector<double> scales;      // cached by refresh()

  // Re-ternarizes: recomputes the cached scales. Returns the number of
  // degenerate layers.
  int refresh();
  std::vector<TernaryLayerState> states() const;
  std::vector<Eigen::MatrixXd> quantized() const;
  // ternary_weight ops over the current leaves, for forward().
  WeightOverride graph_weights() const;
  void zero_grad();
  // Plain MLP carrying the quantized weights and the full-precision biases.
  MLPParams quantized_params() const;
};

ad::Tensor ternary_forward(const TernaryNetwork& net, const ad::Tensor& input);
Eigen::MatrixXd ternary_evaluate(const TernaryNetwork& net, const Eigen::MatrixXd& input);

// Delta <- clamp(Delta - lr * dL/dDelta, 0, max|w|) for every layer, using
// the gradients stored on the delta leaves.
void threshold_step(TernaryNetwork& net, double learning_rate);
// Adam on the full-precision weights and biases using the stored
// (straight-through) gradients.
void weight_step(TernaryNetwork& net, AdamState& state);

struct TernaryConfig {
  double threshold_learning_rate = -1.0;  // < 0: use the Adam learning rate
  double delta_init_fraction = 0.7;
  double width_fraction = kSurrogateWidthFraction;
};

struct TernaryGenerator {
  TernaryNetwork net;
  NoisePrior noise;

  GeneratorModel quantized_model() const { return {net.quantized_params(), noise}; }
};

struct TernaryMonitor {
  // Called after every iteration with the re-ternarized generator.
  std::function<void(int iteration, const TernaryGenerator& generator)> callback;
};

// Stage II with all three networks ternarized. Per iteration: ternarize;
// threshold updates (critics, then generator); re-ternarize; full-precision
// weight updates (critic_iters critic steps, then the generator); re-ternarize.
TernaryGenerator train_stage2_ternary(const GeneratorModel& meta,
                                      const std::pair<CriticModel, CriticModel>& meta_critics,
                                      const DiscreteMeasure& local_data, const TrainConfig& config,
                                      const TernaryConfig& ternary = {}, const TernaryMonitor* monitor = nullptr);

// Number of distinct values in a matrix.
std::size_t distinct_values(const Eigen::MatrixXd& m);

}  // namespace barycoal
