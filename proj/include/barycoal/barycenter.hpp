// Copyright 2026 The barycoal Authors
// SPDX-License-Identifier: Apache-2.0
//
// Exact LP oracles for weighted Wasserstein-1 barycenters on discrete
// measures, and the pairwise recursive coalescence along displacement paths.

#pragma once

#include "barycoal/measures.hpp"

#include <vector>

namespace barycoal {

/// Knowledge transferred from node k: a W1 ball of radius eta_k around mu_k.
struct WassersteinBallConstraint {
  DiscreteMeasure center;
  double radius;

  WassersteinBallConstraint(DiscreteMeasure c, double r);
};

struct WeightedMeasure {
  DiscreteMeasure measure;
  double weight;
};

/// Weight of the local empirical measure in the relaxed objective.
inline constexpr double kLocalMeasureWeight = 1.0;

/// lambda_k = 1 / eta_k, order preserved.
std::vector<WeightedMeasure> lagrangian_weights(const std::vector<WassersteinBallConstraint>& constraints);

struct BarycenterProblem {
  std::vector<WeightedMeasure> inputs;
  std::vector<double> support;  // candidate points for nu, row-major
  std::size_t dim;
  GroundMetric metric;

  BarycenterProblem(std::vector<WeightedMeasure> inputs, std::vector<double> support,
                    std::size_t dim, GroundMetric metric);
  std::size_t support_size() const { return support.size() / dim; }
};

/// sum_k lambda_k W1(nu, mu_k).
double barycenter_objective(const DiscreteMeasure& nu, const BarycenterProblem& problem);

struct BarycenterResult {
  DiscreteMeasure nu;
  double objective;
};

/// Largest LP accepted by fixed_support_barycenter: S * sum_k n_k.
inline constexpr std::size_t kMaxBarycenterVariables = 4096;

/// Joint LP over {gamma_k, nu}: min sum_k lambda_k <C_k, gamma_k> with
/// gamma_k 1 = nu and gamma_k^T 1 = mu_k. Throws InfeasibleError if the LP
/// has no solution.
BarycenterResult fixed_support_barycenter(const BarycenterProblem& problem);

/// Bounding box of all input supports, `per_axis` points per coordinate.
std::vector<double> default_grid_support(const std::vector<DiscreteMeasure>& measures,
                                         std::size_t per_axis = 11);

/// Pairwise step parameter t* = lambda_k / (lambda_prev + lambda_k).
double pairwise_step(double weight_prev, double weight_new);

/// nu*_1 = mu_1; nu*_k is the displacement interpolant between nu*_{k-1} and
/// mu_k at t*, where nu*_{k-1} carries the accumulated weight of mu_1..mu_{k-1}.
std::vector<DiscreteMeasure> recursive_coalesce_lp(const std::vector<DiscreteMeasure>& measures,
                                                   const std::vector<double>& weights,
                                                   const GroundMetric& metric);

/// True iff every member of full_set that is not a candidate lies on a
/// minimal geodesic (gap <= 1e-9) between some pair of candidates.
bool refined_forming_set_check(const std::vector<DiscreteMeasure>& candidates,
                               const std::vector<DiscreteMeasure>& full_set,
                               const GroundMetric& metric);

}  // namespace barycoal
