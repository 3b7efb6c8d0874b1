// Copyright 2026 The barycoal Authors
// SPDX-License-Identifier: Apache-2.0

#include "barycoal/barycenter.hpp"

#include "barycoal/error.hpp"
#include "barycoal/lp_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace barycoal {

WassersteinBallConstraint::WassersteinBallConstraint(DiscreteMeasure c, double r)
    : center(std::move(c)), radius(r) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("Wasserstein ball radius must be positive, got " +
                                std::to_string(radius));
  }
}

std::vector<WeightedMeasure> lagrangian_weights(const std::vector<WassersteinBallConstraint>& constraints) {
  std::vector<WeightedMeasure> out;
  out.reserve(constraints.size());
  for (const auto& c : constraints) {
    if (!(c.radius > 0.0)) throw std::invalid_argument("lagrangian_weights: non-positive radius");
    out.push_back({c.center, 1.0 / c.radius});
  }
  return out;
}

BarycenterProblem::BarycenterProblem(std::vector<WeightedMeasure> in, std::vector<double> sup,
                                     std::size_t d, GroundMetric m)
    : inputs(std::move(in)), support(std::move(sup)), dim(d), metric(m) {
  if (inputs.empty()) throw std::invalid_argument("BarycenterProblem: no input measures");
  if (dim == 0 || support.empty() || support.size() % dim != 0) {
    throw std::invalid_argument("BarycenterProblem: support must be a non-empty point list");
  }
  for (const auto& wm : inputs) {
    if (!(wm.weight > 0.0)) throw std::invalid_argument("BarycenterProblem: weights must be positive");
    if (wm.measure.dim() != dim) throw std::invalid_argument("BarycenterProblem: dimension mismatch");
  }
}

double barycenter_objective(const DiscreteMeasure& nu, const BarycenterProblem& problem) {
  if (nu.dim() != problem.dim) throw std::invalid_argument("barycenter_objective: dimension mismatch");
  double total = 0.0;
  for (const auto& wm : problem.inputs) {
    total += wm.weight * w1_distance(nu, wm.measure, problem.metric).cost;
  }
  return total;
}

BarycenterResult fixed_support_barycenter(const BarycenterProblem& problem) {
  const std::size_t S = problem.support_size();
  const std::size_t d = problem.dim;
  std::size_t total_atoms = 0;
  for (const auto& wm : problem.inputs) total_atoms += wm.measure.size();
  if (S * total_atoms > kMaxBarycenterVariables) {
    throw std::invalid_argument("fixed_support_barycenter: " + std::to_string(S * total_atoms) +
                                " coupling variables exceed the desk-scale limit of " +
                                std::to_string(kMaxBarycenterVariables));
  }
  const std::size_t K = problem.inputs.size();
  const std::size_t n_vars = S * total_atoms + S;
  const std::size_t n_rows = K * S + total_atoms + 1;
  const std::size_t nu_offset = S * total_atoms;

  LinearProgram lp;
  lp.A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_vars));
  lp.b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_rows));
  lp.c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_vars));

  auto support_point = [&](std::size_t s) {
    return std::span<const double>(problem.support.data() + s * d, d);
  };

  std::size_t var = 0;
  std::size_t row_shared = 0;           // gamma_k 1 - nu = 0
  std::size_t row_marginal = K * S;     // gamma_k^T 1 = mu_k
  for (const auto& wm : problem.inputs) {
    const DiscreteMeasure& mu = wm.measure;
    const std::size_t n = mu.size();
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t j = 0; j < n; ++j) {
        const auto col = static_cast<Eigen::Index>(var + s * n + j);
        lp.c[col] = wm.weight * problem.metric(support_point(s), mu.point(j));
        lp.A(static_cast<Eigen::Index>(row_shared + s), col) = 1.0;
        lp.A(static_cast<Eigen::Index>(row_marginal + j), col) = 1.0;
      }
      lp.A(static_cast<Eigen::Index>(row_shared + s), static_cast<Eigen::Index>(nu_offset + s)) = -1.0;
    }
    for (std::size_t j = 0; j < n; ++j) lp.b[static_cast<Eigen::Index>(row_marginal + j)] = mu.weight(j);
    var += S * n;
    row_shared += S;
    row_marginal += n;
  }
  const auto last = static_cast<Eigen::Index>(n_rows - 1);
  for (std::size_t s = 0; s < S; ++s) lp.A(last, static_cast<Eigen::Index>(nu_offset + s)) = 1.0;
  lp.b[last] = 1.0;

  const LpResult res = solve_lp(lp);
  if (res.status != LpStatus::Optimal) {
    throw InfeasibleError("fixed_support_barycenter: LP is " +
                          std::string(res.status == LpStatus::Infeasible ? "infeasible" : "unbounded"));
  }
  std::vector<double> masses(S);
  for (std::size_t s = 0; s < S; ++s) masses[s] = res.x[static_cast<Eigen::Index>(nu_offset + s)];
  return {DiscreteMeasure::normalized(problem.support, d, std::move(masses)), res.objective};
}

std::vector<double> default_grid_support(const std::vector<DiscreteMeasure>& measures,
                                         std::size_t per_axis) {
  if (measures.empty()) throw std::invalid_argument("default_grid_support: no measures");
  if (per_axis < 2) throw std::invalid_argument("default_grid_support: need >= 2 points per axis");
  const std::size_t d = measures.front().dim();
  std::vector<double> lo(d, std::numeric_limits<double>::infinity());
  std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
  for (const auto& m : measures) {
    if (m.dim() != d) throw std::invalid_argument("default_grid_support: dimension mismatch");
    for (std::size_t i = 0; i < m.size(); ++i) {
      for (std::size_t k = 0; k < d; ++k) {
        lo[k] = std::min(lo[k], m.point(i)[k]);
        hi[k] = std::max(hi[k], m.point(i)[k]);
      }
    }
  }
  std::size_t total = 1;
  for (std::size_t k = 0; k < d; ++k) total *= per_axis;
  std::vector<double> grid;
  grid.reserve(total * d);
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t c = 0; c < total; ++c) {
    // idx[0] varies slowest.
    std::size_t rem = c;
    for (std::size_t k = d; k-- > 0;) {
      idx[k] = rem % per_axis;
      rem /= per_axis;
    }
    for (std::size_t k = 0; k < d; ++k) {
      const double frac = static_cast<double>(idx[k]) / static_cast<double>(per_axis - 1);
      grid.push_back(lo[k] + frac * (hi[k] - lo[k]));
    }
  }
  return grid;
}

double pairwise_step(double weight_prev, double weight_new) {
  if (!(weight_prev > 0.0) || !(weight_new > 0.0)) {
    throw std::invalid_argument("pairwise_step: weights must be positive");
  }
  return weight_new / (weight_prev + weight_new);
}

std::vector<DiscreteMeasure> recursive_coalesce_lp(const std::vector<DiscreteMeasure>& measures,
                                                   const std::vector<double>& weights,
                                                   const GroundMetric& metric) {
  if (measures.empty()) throw std::invalid_argument("recursive_coalesce_lp: empty input");
  if (weights.size() != measures.size()) {
    throw std::invalid_argument("recursive_coalesce_lp: one weight per measure required");
  }
  std::vector<DiscreteMeasure> out;
  out.reserve(measures.size());
  out.push_back(measures.front());
  double accumulated = weights.front();
  for (std::size_t k = 1; k < measures.size(); ++k) {
    const double t = pairwise_step(accumulated, weights[k]);
    const TransportPlan plan = w1_distance(out.back(), measures[k], metric);
    out.push_back(displacement_interpolate(plan, t));
    accumulated += weights[k];
  }
  return out;
}

bool refined_forming_set_check(const std::vector<DiscreteMeasure>& candidates,
                               const std::vector<DiscreteMeasure>& full_set,
                               const GroundMetric& metric) {
  for (const auto& member : full_set) {
    const bool is_candidate = std::any_of(candidates.begin(), candidates.end(),
                                          [&](const DiscreteMeasure& c) { return same_measure(c, member); });
    if (is_candidate) continue;
    bool covered = false;
    for (std::size_t i = 0; i < candidates.size() && !covered; ++i) {
      for (std::size_t j = i + 1; j < candidates.size() && !covered; ++j) {
        covered = geodesic_gap(candidates[i], member, candidates[j], metric) <= 1e-9;
      }
    }
    if (!covered) return false;
  }
  return true;
}

}  // namespace barycoal
