// Copyright 2026 The barycoal Authors
// SPDX-License-Identifier: Apache-2.0
//
// Frechet distance between Gaussian fits of feature embeddings:
//
//   |mu_a - mu_b|^2 + tr(S_a + S_b - 2 (S_a^1/2 S_b S_a^1/2)^1/2)
//
// Features are either the raw data (the default for low-dimensional toys) or
// the penultimate layer of a small classifier trained on labeled toy data.

#pragma once

#include "barycoal/adversarial.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace barycoal {

inline constexpr double kCovarianceRidge = 1e-6;

struct GaussianFit {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

enum class FeatureKind { Identity, TinyClassifierPenultimate };

struct FeatureExtractor {
  FeatureKind kind = FeatureKind::Identity;
  std::optional<MLPParams> classifier;  // full classifier; features skip its last layer

  // Rows of samples to rows of features.
  Eigen::MatrixXd features(const Eigen::MatrixXd& samples) const;
};

// Weighted moments of the extracted features; the covariance is symmetrized
// and receives a kCovarianceRidge * I ridge.
GaussianFit fit_gaussian(const DiscreteMeasure& samples, const FeatureExtractor& extractor = {});

// Throws std::invalid_argument on dimension mismatch and std::domain_error on
// a covariance with an eigenvalue below -1e-10.
double frechet_distance(const GaussianFit& a, const GaussianFit& b);

struct ClassifierConfig {
  int hidden_width = 16;
  int iterations = 500;
  int batch_size = 64;
  double learning_rate = 1e-2;
  std::uint64_t seed = 0;
};

// Two tanh hidden layers and a softmax head. Throws std::invalid_argument
// with fewer than two classes or mismatched labels.
FeatureExtractor train_feature_extractor(const DiscreteMeasure& data, const std::vector<int>& labels,
                                         const ClassifierConfig& config = {});
// Fraction of points whose argmax logit equals the label.
double classifier_accuracy(const FeatureExtractor& extractor, const DiscreteMeasure& data,
                           const std::vector<int>& labels);

// Frechet distance between fits of `samples` and the full reference.
double score_samples(const DiscreteMeasure& samples, const DiscreteMeasure& reference,
                     const FeatureExtractor& extractor = {});
// Draws n >= 100 generator samples with the given seed and scores them.
double score_model(const GeneratorModel& g, const DiscreteMeasure& reference, const FeatureExtractor& extractor,
                   std::size_t n, std::uint64_t seed);

}  // namespace barycoal
