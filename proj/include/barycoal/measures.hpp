// Copyright 2026 The barycoal Authors
// SPDX-License-Identifier: Apache-2.0
//
// Discrete probability measures, exact Wasserstein-1 transport and the
// McCann displacement path between two measures.

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace barycoal {

enum class MetricKind { L1, L2, L2Squared };

/// Ground cost c(x, y). Only true metrics are accepted: squared Euclidean
/// cost does not satisfy the triangle inequality and is rejected.
class GroundMetric {
 public:
  explicit GroundMetric(MetricKind kind);

  static GroundMetric l1() { return GroundMetric(MetricKind::L1); }
  static GroundMetric l2() { return GroundMetric(MetricKind::L2); }

  MetricKind kind() const { return kind_; }
  double operator()(std::span<const double> x, std::span<const double> y) const;

 private:
  MetricKind kind_;
};

/// Weighted point cloud. Points are stored row-major in a flat buffer.
/// Masses below kPruneThreshold are dropped at construction.
class DiscreteMeasure {
 public:
  static constexpr double kPruneThreshold = 1e-15;
  static constexpr double kSumTolerance = 1e-12;

  DiscreteMeasure(std::vector<double> points, std::size_t dim, std::vector<double> weights);

  /// Uniform weights 1/n over the given points.
  static DiscreteMeasure uniform(std::vector<double> points, std::size_t dim);
  /// Rows of `samples` become uniformly weighted support points.
  static DiscreteMeasure from_rows(const Eigen::MatrixXd& samples);
  /// Clips negatives and rescales nonnegative masses to sum to one.
  static DiscreteMeasure normalized(std::vector<double> points, std::size_t dim,
                                    std::vector<double> masses);

  std::size_t size() const { return weights_.size(); }
  std::size_t dim() const { return dim_; }
  std::span<const double> point(std::size_t i) const {
    return {points_.data() + i * dim_, dim_};
  }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  bool is_uniform(double tol = 1e-12) const;
  /// Support as an n x d matrix.
  Eigen::MatrixXd point_matrix() const;

 private:
  std::vector<double> points_;
  std::size_t dim_;
  std::vector<double> weights_;
};

struct TransportPlan {
  DiscreteMeasure row_measure;
  DiscreteMeasure col_measure;
  Eigen::MatrixXd coupling;
  double cost = 0.0;
  // Optimal LP duals: row_dual[i] + col_dual[j] <= c(x_i, y_j), with
  // equality on the support of the coupling.
  Eigen::VectorXd row_dual;
  Eigen::VectorXd col_dual;
};

/// Values of a potential on a finite support.
struct DualPotential {
  std::vector<double> points;
  std::size_t dim = 0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  std::span<const double> point(std::size_t i) const {
    return {points.data() + i * dim, dim};
  }
};

Eigen::MatrixXd cost_matrix(const DiscreteMeasure& a, const DiscreteMeasure& b,
                            const GroundMetric& metric);

/// Exact W1 with an optimal coupling, solved by network simplex.
TransportPlan w1_distance(const DiscreteMeasure& a, const DiscreteMeasure& b,
                          const GroundMetric& metric);

/// Exhaustive minimization over all n! assignments; uniform, equal-size
/// measures with n <= 8 only.
double w1_bruteforce_uniform(const DiscreteMeasure& a, const DiscreteMeasure& b,
                             const GroundMetric& metric);

/// Finite-support c-transform for W1: phi^c(y_k) = min_i c(x_i, y_k) - phi(x_i).
/// A potential that is already 1-Lipschitz is returned negated, bit for bit.
DualPotential c_transform(const DualPotential& phi, const GroundMetric& metric);

/// Largest pairwise violation max(|phi_i - phi_j| - c_ij, 0).
double lipschitz_violation(const DualPotential& phi, const GroundMetric& metric);

/// Kantorovich potential certified by the plan's duals, evaluated on the
/// union of both supports. 1-Lipschitz and attains W1 in the dual.
DualPotential optimal_potential(const TransportPlan& plan, const GroundMetric& metric);

/// sum phi da - sum phi db. Every support point of a and b must appear in
/// phi's support.
double dual_objective(const DualPotential& phi, const DiscreteMeasure& a,
                      const DiscreteMeasure& b);

/// Each coupling atom gamma_ij is moved to (1 - t) x_i + t y_j. Coincident
/// points (equal after rounding to 1e-12) are merged.
DiscreteMeasure displacement_interpolate(const TransportPlan& plan, double t);

/// W1(a, mid) + W1(mid, b) - W1(a, b). Zero iff mid is on a minimal geodesic.
double geodesic_gap(const DiscreteMeasure& a, const DiscreteMeasure& mid,
                    const DiscreteMeasure& b, const GroundMetric& metric);

/// True when both measures put the same mass on the same points (order free).
bool same_measure(const DiscreteMeasure& a, const DiscreteMeasure& b, double tol = 1e-12);

}  // namespace barycoal
