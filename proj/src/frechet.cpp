// Copyright 2026 The barycoal Authors
// SPDX-License-Identifier: Apache-2.0

#include "barycoal/frechet.hpp"

#include <Eigen/Eigenvalues>

#include <set>
#include <stdexcept>

namespace barycoal {

namespace {

constexpr double kPsdTolerance = 1e-10;

Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

void require_psd(const Eigen::MatrixXd& c, const char* which) {
  if ((c - c.transpose()).cwiseAbs().maxCoeff() > kPsdTolerance) {
    throw std::domain_error(std::string("frechet_distance: covariance ") + which + " is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kPsdTolerance) {
    throw std::domain_error(std::string("frechet_distance: covariance ") + which + " is not positive semi-definite");
  }
}

}  // namespace

Eigen::MatrixXd FeatureExtractor::features(const Eigen::MatrixXd& samples) const {
  if (kind == FeatureKind::Identity) return samples;
  if (!classifier || classifier->layers.size() < 2) {
    throw std::invalid_argument("FeatureExtractor: classifier features need a classifier with >= 2 layers");
  }
  if (static_cast<std::size_t>(samples.cols()) != classifier->input_dim()) {
    throw std::invalid_argument("FeatureExtractor: sample dimension does not match the classifier");
  }
  MLPParams body = *classifier;
  body.layers.pop_back();
  return evaluate(body, samples);
}

GaussianFit fit_gaussian(const DiscreteMeasure& samples, const FeatureExtractor& extractor) {
  if (samples.size() == 0) throw std::invalid_argument("fit_gaussian: empty sample set");
  const Eigen::MatrixXd f = extractor.features(samples.point_matrix());
  const Eigen::Map<const Eigen::VectorXd> w(samples.weights().data(), static_cast<Eigen::Index>(samples.size()));
  GaussianFit fit;
  fit.mean = f.transpose() * w;
  const Eigen::MatrixXd centered = f.rowwise() - fit.mean.transpose();
  fit.covariance = centered.transpose() * w.asDiagonal() * centered;
  fit.covariance = 0.5 * (fit.covariance + fit.covariance.transpose()).eval();
  fit.covariance.diagonal().array() += kCovarianceRidge;
  return fit;
}

double frechet_distance(const GaussianFit& a, const GaussianFit& b) {
  const Eigen::Index d = a.mean.size();
  if (b.mean.size() != d || a.covariance.rows() != d || a.covariance.cols() != d || b.covariance.rows() != d ||
      b.covariance.cols() != d) {
    throw std::invalid_argument("frechet_distance: dimension mismatch");
  }
  require_psd(a.covariance, "a");
  require_psd(b.covariance, "b");
  const Eigen::MatrixXd ra = sqrt_psd(a.covariance);
  Eigen::MatrixXd inner = ra * b.covariance * ra;
  inner = 0.5 * (inner + inner.transpose()).eval();
  const double trace = a.covariance.trace() + b.covariance.trace() - 2.0 * sqrt_psd(inner).trace();
  return std::max(0.0, (a.mean - b.mean).squaredNorm() + trace);
}

FeatureExtractor train_feature_extractor(const DiscreteMeasure& data, const std::vector<int>& labels,
                                         const ClassifierConfig& config) {
  if (labels.size() != data.size()) throw std::invalid_argument("train_feature_extractor: one label per point");
  const std::set<int> classes(labels.begin(), labels.end());
  if (classes.size() < 2) throw std::invalid_argument("train_feature_extractor: need at least two classes");
  if (*classes.begin() < 0) throw std::invalid_argument("train_feature_extractor: labels must be >= 0");
  if (config.hidden_width < 1 || config.iterations < 0 || config.batch_size < 1) {
    throw std::invalid_argument("train_feature_extractor: invalid config");
  }
  const int num_classes = *classes.rbegin() + 1;
  Rng rng(config.seed);
  const int h = config.hidden_width;
  MLPParams net = MLPParams::init({static_cast<int>(data.dim()), h, h, num_classes},
                                  {Activation::Tanh, Activation::Tanh, Activation::Identity}, rng);
  AdamConfig adam;
  adam.learning_rate = config.learning_rate;
  adam.beta1 = 0.9;
  AdamState opt(net.parameters(), adam);
  const Eigen::MatrixXd x = data.point_matrix();
  std::discrete_distribution<std::size_t> pick(data.weights().begin(), data.weights().end());
  Eigen::MatrixXd batch(config.batch_size, x.cols());
  std::vector<int> batch_labels(static_cast<std::size_t>(config.batch_size));
  for (int it = 0; it < config.iterations; ++it) {
    for (int r = 0; r < config.batch_size; ++r) {
      const std::size_t i = pick(rng);
      batch.row(r) = x.row(static_cast<Eigen::Index>(i));
      batch_labels[static_cast<std::size_t>(r)] = labels[i];
    }
    net.zero_grad();
    ad::backward(ad::softmax_cross_entropy(forward(net, ad::constant(batch)), batch_labels));
    adam_step(net, opt);
  }
  return {FeatureKind::TinyClassifierPenultimate, std::move(net)};
}

double classifier_accuracy(const FeatureExtractor& extractor, const DiscreteMeasure& data,
                           const std::vector<int>& labels) {
  if (!extractor.classifier) throw std::invalid_argument("classifier_accuracy: extractor has no classifier");
  if (labels.size() != data.size()) throw std::invalid_argument("classifier_accuracy: one label per point");
  const Eigen::MatrixXd logits = evaluate(*extractor.classifier, data.point_matrix());
  double correct = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index arg = 0;
    logits.row(i).maxCoeff(&arg);
    if (arg == labels[static_cast<std::size_t>(i)]) correct += 1.0;
  }
  return correct / static_cast<double>(logits.rows());
}

double score_samples(const DiscreteMeasure& samples, const DiscreteMeasure& reference,
                     const FeatureExtractor& extractor) {
  if (samples.dim() != reference.dim()) throw std::invalid_argument("score_samples: dimension mismatch");
  return frechet_distance(fit_gaussian(samples, extractor), fit_gaussian(reference, extractor));
}

double score_model(const GeneratorModel& g, const DiscreteMeasure& reference, const FeatureExtractor& extractor,
                   std::size_t n, std::uint64_t seed) {
  if (n < 100) throw std::invalid_argument("score_model: need at least 100 samples");
  return score_samples(sample_generator(g, n, seed), reference, extractor);
}

}  // namespace barycoal
