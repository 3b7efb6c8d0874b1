// Copyright 2026 The barycoal Authors
// SPDX-License-Identifier: Apache-2.0

#include "barycoal/measures.hpp"

#include "barycoal/transport_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

namespace barycoal {

GroundMetric::GroundMetric(MetricKind kind) : kind_(kind) {
  if (kind == MetricKind::L2Squared) {
    throw std::invalid_argument("squared Euclidean cost is not a metric; W1 requires L1 or L2");
  }
}

double GroundMetric::operator()(std::span<const double> x, std::span<const double> y) const {
  double acc = 0.0;
  if (kind_ == MetricKind::L1) {
    for (std::size_t k = 0; k < x.size(); ++k) acc += std::abs(x[k] - y[k]);
    return acc;
  }
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - y[k];
    acc += d * d;
  }
  return std::sqrt(acc);
}

DiscreteMeasure::DiscreteMeasure(std::vector<double> points, std::size_t dim,
                                 std::vector<double> weights)
    : dim_(dim) {
  if (dim == 0) throw std::invalid_argument("DiscreteMeasure: dimension must be >= 1");
  if (points.size() != weights.size() * dim) {
    throw std::invalid_argument("DiscreteMeasure: points/weights length mismatch");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("DiscreteMeasure: weights must be finite and nonnegative");
    }
    total += w;
  }
  for (double p : points) {
    if (!std::isfinite(p)) throw std::invalid_argument("DiscreteMeasure: non-finite coordinate");
  }
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw std::invalid_argument("DiscreteMeasure: weights sum to " + std::to_string(total) +
                                ", expected 1");
  }
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < kPruneThreshold) continue;
    weights_.push_back(weights[i]);
    points_.insert(points_.end(), points.begin() + static_cast<std::ptrdiff_t>(i * dim),
                   points.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim));
  }
  if (weights_.empty()) throw std::invalid_argument("DiscreteMeasure: empty support");
}

DiscreteMeasure DiscreteMeasure::uniform(std::vector<double> points, std::size_t dim) {
  if (dim == 0 || points.empty() || points.size() % dim != 0) {
    throw std::invalid_argument("DiscreteMeasure::uniform: bad point buffer");
  }
  const std::size_t n = points.size() / dim;
  return DiscreteMeasure(std::move(points), dim,
                         std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

DiscreteMeasure DiscreteMeasure::from_rows(const Eigen::MatrixXd& samples) {
  const auto n = static_cast<std::size_t>(samples.rows());
  const auto d = static_cast<std::size_t>(samples.cols());
  std::vector<double> pts(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) pts[i * d + k] = samples(static_cast<Eigen::Index>(i),
                                                                  static_cast<Eigen::Index>(k));
  }
  return uniform(std::move(pts), d);
}

DiscreteMeasure DiscreteMeasure::normalized(std::vector<double> points, std::size_t dim,
                                            std::vector<double> masses) {
  double total = 0.0;
  for (double& w : masses) {
    w = std::max(w, 0.0);
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("DiscreteMeasure::normalized: zero mass");
  for (double& w : masses) w /= total;
  // Renormalize once more after pruning so the sum invariant is exact.
  std::vector<double> kept_pts;
  std::vector<double> kept_w;
  double kept_total = 0.0;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    if (masses[i] < kPruneThreshold) continue;
    kept_w.push_back(masses[i]);
    kept_total += masses[i];
    kept_pts.insert(kept_pts.end(), points.begin() + static_cast<std::ptrdiff_t>(i * dim),
                    points.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim));
  }
  for (double& w : kept_w) w /= kept_total;
  return DiscreteMeasure(std::move(kept_pts), dim, std::move(kept_w));
}

bool DiscreteMeasure::is_uniform(double tol) const {
  const double expected = 1.0 / static_cast<double>(size());
  return std::all_of(weights_.begin(), weights_.end(),
                     [&](double w) { return std::abs(w - expected) <= tol; });
}

Eigen::MatrixXd DiscreteMeasure::point_matrix() const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t k = 0; k < dim_; ++k) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = points_[i * dim_ + k];
    }
  }
  return out;
}

namespace {

void require_same_dim(const DiscreteMeasure& a, const DiscreteMeasure& b, const char* what) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
  }
}

}  // namespace

Eigen::MatrixXd cost_matrix(const DiscreteMeasure& a, const DiscreteMeasure& b,
                            const GroundMetric& metric) {
  require_same_dim(a, b, "cost_matrix");
  Eigen::MatrixXd c(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = metric(a.point(i), b.point(j));
    }
  }
  return c;
}

TransportPlan w1_distance(const DiscreteMeasure& a, const DiscreteMeasure& b,
                          const GroundMetric& metric) {
  require_same_dim(a, b, "w1_distance");
  if (a.size() == 0 || b.size() == 0) throw std::invalid_argument("w1_distance: empty support");
  const Eigen::MatrixXd cost = cost_matrix(a, b, metric);
  TransportSolution sol = solve_transport(a.weights(), b.weights(), cost);
  return TransportPlan{a, b, std::move(sol.flow), sol.cost, std::move(sol.row_dual),
                       std::move(sol.col_dual)};
}

double w1_bruteforce_uniform(const DiscreteMeasure& a, const DiscreteMeasure& b,
                             const GroundMetric& metric) {
  require_same_dim(a, b, "w1_bruteforce_uniform");
  if (a.size() != b.size()) {
    throw std::invalid_argument("w1_bruteforce_uniform: supports must have equal size");
  }
  if (!a.is_uniform() || !b.is_uniform()) {
    throw std::invalid_argument("w1_bruteforce_uniform: weights must be uniform");
  }
  const std::size_t n = a.size();
  if (n > 8) throw std::invalid_argument("w1_bruteforce_uniform: n > 8 is too expensive");
  const Eigen::MatrixXd cost = cost_matrix(a, b, metric);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += cost(static_cast<Eigen::Index>(i), perm[i]);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(n);
}

double lipschitz_violation(const DualPotential& phi, const GroundMetric& metric) {
  double worst = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    for (std::size_t j = i + 1; j < phi.size(); ++j) {
      const double excess = std::abs(phi.values[i] - phi.values[j]) - metric(phi.point(i), phi.point(j));
      worst = std::max(worst, excess);
    }
  }
  return worst;
}

DualPotential c_transform(const DualPotential& phi, const GroundMetric& metric) {
  if (phi.points.size() != phi.values.size() * phi.dim) {
    throw std::invalid_argument("c_transform: malformed potential");
  }
  DualPotential out = phi;
  if (lipschitz_violation(phi, metric) <= 1e-12) {
    for (double& v : out.values) v = -v;
    return out;
  }
  for (std::size_t k = 0; k < phi.size(); ++k) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < phi.size(); ++i) {
      best = std::min(best, metric(phi.point(i), phi.point(k)) - phi.values[i]);
    }
    out.values[k] = best;
  }
  return out;
}

DualPotential optimal_potential(const TransportPlan& plan, const GroundMetric& metric) {
  const DiscreteMeasure& a = plan.row_measure;
  const DiscreteMeasure& b = plan.col_measure;
  DualPotential phi;
  phi.dim = a.dim();
  phi.points = a.points();
  phi.points.insert(phi.points.end(), b.points().begin(), b.points().end());
  const std::size_t total = a.size() + b.size();
  phi.values.resize(total);
  for (std::size_t z = 0; z < total; ++z) {
    const std::span<const double> pz = phi.point(z);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < b.size(); ++j) {
      best = std::min(best, metric(pz, b.point(j)) - plan.col_dual[static_cast<Eigen::Index>(j)]);
    }
    phi.values[z] = best;
  }
  return phi;
}

double dual_objective(const DualPotential& phi, const DiscreteMeasure& a, const DiscreteMeasure& b) {
  auto lookup = [&](std::span<const double> p) {
    for (std::size_t i = 0; i < phi.size(); ++i) {
      if (std::equal(p.begin(), p.end(), phi.point(i).begin())) return phi.values[i];
    }
    throw std::invalid_argument("dual_objective: support point missing from potential");
  };
  if (a.dim() != phi.dim || b.dim() != phi.dim) {
    throw std::invalid_argument("dual_objective: dimension mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a.weight(i) * lookup(a.point(i));
  for (std::size_t j = 0; j < b.size(); ++j) acc -= b.weight(j) * lookup(b.point(j));
  return acc;
}

DiscreteMeasure displacement_interpolate(const TransportPlan& plan, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::invalid_argument("displacement_interpolate: t must lie in [0, 1]");
  }
  const DiscreteMeasure& a = plan.row_measure;
  const DiscreteMeasure& b = plan.col_measure;
  const std::size_t d = a.dim();
  std::map<std::vector<long long>, std::size_t> index;
  std::vector<double> pts;
  std::vector<double> masses;
  std::vector<double> p(d);
  std::vector<long long> key(d);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double mass = plan.coupling(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (mass < DiscreteMeasure::kPruneThreshold) continue;
      for (std::size_t k = 0; k < d; ++k) {
        p[k] = (1.0 - t) * a.point(i)[k] + t * b.point(j)[k];
        key[k] = std::llround(p[k] * 1e12);
      }
      auto [it, inserted] = index.try_emplace(key, masses.size());
      if (inserted) {
        pts.insert(pts.end(), p.begin(), p.end());
        masses.push_back(mass);
      } else {
        masses[it->second] += mass;
      }
    }
  }
  return DiscreteMeasure::normalized(std::move(pts), d, std::move(masses));
}

double geodesic_gap(const DiscreteMeasure& a, const DiscreteMeasure& mid, const DiscreteMeasure& b,
                    const GroundMetric& metric) {
  require_same_dim(a, mid, "geodesic_gap");
  require_same_dim(mid, b, "geodesic_gap");
  return w1_distance(a, mid, metric).cost + w1_distance(mid, b, metric).cost -
         w1_distance(a, b, metric).cost;
}

bool same_measure(const DiscreteMeasure& a, const DiscreteMeasure& b, double tol) {
  if (a.dim() != b.dim()) return false;
  auto collect = [](const DiscreteMeasure& m) {
    std::map<std::vector<long long>, double> out;
    for (std::size_t i = 0; i < m.size(); ++i) {
      std::vector<long long> key(m.dim());
      for (std::size_t k = 0; k < m.dim(); ++k) key[k] = std::llround(m.point(i)[k] * 1e12);
      out[key] += m.weight(i);
    }
    return out;
  };
  const auto ma = collect(a);
  const auto mb = collect(b);
  if (ma.size() != mb.size()) return false;
  auto ib = mb.begin();
  for (auto ia = ma.begin(); ia != ma.end(); ++ia, ++ib) {
    if (ia->first != ib->first || std::abs(ia->second - ib->second) > tol) return false;
  }
  return true;
}

}  // namespace barycoal
