// Copyright 2026 The barycoal Authors
// SPDX-License-Identifier: Apache-2.0
//
// WGAN-GP training for pre-trained node models, the two-stage recursive
// coalescence (Stage I across pre-trained models, Stage II at the target
// node), and the three comparison baselines. Every run draws all of its
// randomness from one generator seeded by TrainConfig::seed.

#pragma once

#include "barycoal/measures.hpp"
#include "barycoal/mlp.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace barycoal {

enum class NoiseKind { Gaussian, Uniform };

struct NoisePrior {
  NoiseKind kind = NoiseKind::Gaussian;
  int dim = 8;

  // n x dim; Uniform draws from [-1, 1].
  Eigen::MatrixXd sample(std::size_t n, Rng& rng) const;
};

struct GeneratorModel {
  MLPParams params;
  NoisePrior noise;

  std::size_t data_dim() const { return params.output_dim(); }
};

struct CriticModel {
  MLPParams params;
};

struct Architecture {
  int noise_dim = 8;
  int hidden_width = 64;
  int hidden_layers = 2;
  NoiseKind noise = NoiseKind::Gaussian;
};

// ReLU hidden layers; Tanh output for data_dim >= 2, Identity in 1D.
GeneratorModel make_generator(std::size_t data_dim, const Architecture& arch, Rng& rng);
// LeakyReLU(0.2) hidden layers, scalar Identity output.
CriticModel make_critic(std::size_t data_dim, const Architecture& arch, Rng& rng);

// Which previous critic seeds psi~_k at recursion k of Stage I.
enum class CriticInheritance { PreviousPsi, PreviousPsiTilde };

struct TrainConfig {
  int batch_size = 64;
  int generator_iters = 2000;
  int critic_iters = 5;
  AdamConfig adam;
  double gp_coefficient = 10.0;
  // (lambda_psi, lambda_psi~) per Stage I recursion k = 2..K; missing
  // entries default to (1, 1).
  std::vector<std::pair<double, double>> stage1_weights;
  // (lambda for the local-data critic, lambda for the meta-replay critic).
  std::pair<double, double> stage2_weights{1.0, 1.0};
  CriticInheritance inheritance = CriticInheritance::PreviousPsi;
  std::uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument
};

struct TrainedPair {
  GeneratorModel generator;
  CriticModel critic;
};

struct Stage1Result {
  GeneratorModel generator;  // G*_K
  CriticModel psi;           // psi*_K
  CriticModel psi_tilde;     // psi~*_K
};

// Called before the first iteration (iteration 0) and after every
// `every`-th generator iteration, plus after the last one.
struct TrainingMonitor {
  int every = 0;
  std::function<void(int iteration, const GeneratorModel& generator)> callback;

  void notify(int iteration, int total, const GeneratorModel& g) const;
};

Eigen::MatrixXd sample_points(const GeneratorModel& g, std::size_t n, Rng& rng);
DiscreteMeasure sample_generator(const GeneratorModel& g, std::size_t n, std::uint64_t seed);
// n rows drawn i.i.d. from the measure's weights.
Eigen::MatrixXd sample_measure(const DiscreteMeasure& m, std::size_t n, Rng& rng);

// -weight * (mean psi(real) - mean psi(fake)) + gradient penalty.
ad::Tensor critic_loss(const CriticModel& critic, const Eigen::MatrixXd& real, const Eigen::MatrixXd& fake,
                       double weight, double gp_coefficient, Rng& rng, const WeightOverride* weights = nullptr);
ad::Tensor critic_loss(const MLPParams& critic, const Eigen::MatrixXd& real, const Eigen::MatrixXd& fake,
                       double weight, double gp_coefficient, Rng& rng, const WeightOverride* weights = nullptr);
// -(lambda_a * mean psi_a(out) + lambda_b * mean psi_b(out)).
ad::Tensor generator_loss_two_critics(const ad::Tensor& gen_out, const CriticModel& critic_a,
                                      const CriticModel& critic_b, double lambda_a, double lambda_b);
ad::Tensor generator_loss(const ad::Tensor& gen_out, const CriticModel& critic);

// Rows per source when a batch of m is split evenly over `sources`.
std::vector<int> mixing_counts(int m, int sources);

TrainedPair train_pretrained(const DiscreteMeasure& dataset, const TrainConfig& config, const Architecture& arch,
                             const TrainingMonitor* monitor = nullptr);

Stage1Result train_stage1(const std::vector<TrainedPair>& pretrained, const TrainConfig& config,
                          const TrainingMonitor* monitor = nullptr);

// All K critics at once: critic k starts from the k-th pretrained critic and
// sees the frozen k-th generator; the generator starts from the first model.
// Slots run newest model first, so for K = 2 this is exactly train_stage1
// with weights (lambda_2, lambda_1).
GeneratorModel train_one_shot(const std::vector<TrainedPair>& pretrained, const std::vector<double>& weights,
                              const TrainConfig& config, const TrainingMonitor* monitor = nullptr);

// meta_critics = (psi~*_K, psi*_K). psi_0 sees local data as real, psi~_0
// sees fresh samples of the frozen meta generator.
GeneratorModel train_stage2(const GeneratorModel& meta, const std::pair<CriticModel, CriticModel>& meta_critics,
                            const DiscreteMeasure& local_data, const TrainConfig& config,
                            const TrainingMonitor* monitor = nullptr);

GeneratorModel baseline_edge_only(const DiscreteMeasure& local_data, const TrainConfig& config,
                                  const Architecture& arch, const TrainingMonitor* monitor = nullptr);
GeneratorModel baseline_transfer(const TrainedPair& pretrained, const DiscreteMeasure& local_data,
                                 const TrainConfig& config, const TrainingMonitor* monitor = nullptr);
// Initialized from pretrained[0]; real batches mix local data (when given)
// and replay from every pretrained generator in equal proportion.
GeneratorModel baseline_ensemble(const std::vector<TrainedPair>& pretrained, const DiscreteMeasure* local_data,
                                 const TrainConfig& config, const TrainingMonitor* monitor = nullptr);

// Stable per-purpose seed derivation (splitmix64 of base ^ hash(tag)).
std::uint64_t derive_seed(std::uint64_t base, const std::string& tag);

}  // namespace barycoal
