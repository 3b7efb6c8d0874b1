// Copyright 2026 The barycoal Authors
// SPDX-License-Identifier: Apache-2.0

#include "barycoal/lp_simplex.hpp"
#include "barycoal/measures.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <random>

using namespace barycoal;
using barycoal::testing::dirac;
using barycoal::testing::random_measure;
using barycoal::testing::random_uniform_measure;

namespace {

// Transport LP assembled densely and handed to the tableau simplex: an
// independent route to W1 for small non-uniform instances.
double w1_dense_lp(const DiscreteMeasure& a, const DiscreteMeasure& b, const GroundMetric& metric) {
  const auto n = static_cast<Eigen::Index>(a.size());
  const auto m = static_cast<Eigen::Index>(b.size());
  LinearProgram lp;
  lp.A = Eigen::MatrixXd::Zero(n + m, n * m);
  lp.b.resize(n + m);
  lp.c.resize(n * m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      lp.c[i * m + j] = metric(a.point(static_cast<std::size_t>(i)), b.point(static_cast<std::size_t>(j)));
      lp.A(i, i * m + j) = 1.0;
      lp.A(n + j, i * m + j) = 1.0;
    }
    lp.b[i] = a.weight(static_cast<std::size_t>(i));
  }
  for (Eigen::Index j = 0; j < m; ++j) lp.b[n + j] = b.weight(static_cast<std::size_t>(j));
  const LpResult r = solve_lp(lp);
  REQUIRE(r.status == LpStatus::Optimal);
  return r.objective;
}

void check_marginals(const TransportPlan& plan, const GroundMetric& metric) {
  const Eigen::VectorXd rows = plan.coupling.rowwise().sum();
  const Eigen::VectorXd cols = plan.coupling.colwise().sum().transpose();
  for (std::size_t i = 0; i < plan.row_measure.size(); ++i) {
    CHECK(std::abs(rows[static_cast<Eigen::Index>(i)] - plan.row_measure.weight(i)) <= 1e-9);
  }
  for (std::size_t j = 0; j < plan.col_measure.size(); ++j) {
    CHECK(std::abs(cols[static_cast<Eigen::Index>(j)] - plan.col_measure.weight(j)) <= 1e-9);
  }
  CHECK((plan.coupling.array() >= 0.0).all());
  const double recomputed = (plan.coupling.array() *
                             cost_matrix(plan.row_measure, plan.col_measure, metric).array()).sum();
  CHECK(std::abs(recomputed - plan.cost) <= 1e-9);
}

}  // namespace

TEST_CASE("measure construction validates invariants") {
  CHECK_THROWS_AS(DiscreteMeasure({0.0, 1.0}, 1, {0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteMeasure({0.0, 1.0}, 1, {1.5, -0.5}), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteMeasure({0.0, 1.0, 2.0}, 2, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteMeasure({}, 1, {}), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteMeasure({0.0}, 0, {1.0}), std::invalid_argument);

  const DiscreteMeasure pruned({0.0, 1.0, 2.0}, 1, {0.5, 1e-16, 0.5 - 1e-16});
  CHECK(pruned.size() == 2);
  CHECK(pruned.point(1)[0] == 2.0);
}

TEST_CASE("squared Euclidean ground cost is rejected") {
  CHECK_THROWS_AS(GroundMetric(MetricKind::L2Squared), std::invalid_argument);
  CHECK(GroundMetric::l1()(std::vector<double>{0, 0}, std::vector<double>{1, 1}) == 2.0);
  CHECK(GroundMetric::l2()(std::vector<double>{0, 0}, std::vector<double>{3, 4}) == 5.0);
}

TEST_CASE("w1_distance reproduces the diagonal Dirac distance") {
  const auto plan = w1_distance(dirac({0, 0}), dirac({1, 1}), GroundMetric::l1());
  CHECK(plan.cost == 2.0);
  CHECK(plan.coupling(0, 0) == 1.0);
}

TEST_CASE("w1_distance of a measure with itself is zero on the diagonal") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 10; ++rep) {
    const auto a = random_measure(rng, 7, 2);
    const auto plan = w1_distance(a, a, GroundMetric::l2());
    CHECK(std::abs(plan.cost) <= 1e-12);
    for (Eigen::Index i = 0; i < plan.coupling.rows(); ++i) {
      CHECK(plan.coupling(i, i) == doctest::Approx(a.weight(static_cast<std::size_t>(i))).epsilon(1e-12));
    }
  }
}

TEST_CASE("w1_distance matches permutation brute force on uniform 4-point measures") {
  std::mt19937_64 rng(2026);
  for (int rep = 0; rep < 100; ++rep) {
    const auto a = random_uniform_measure(rng, 4, 2);
    const auto b = random_uniform_measure(rng, 4, 2);
    for (const auto& metric : {GroundMetric::l1(), GroundMetric::l2()}) {
      const auto plan = w1_distance(a, b, metric);
      CHECK(std::abs(plan.cost - w1_bruteforce_uniform(a, b, metric)) <= 1e-9);
      check_marginals(plan, metric);
    }
  }
}

TEST_CASE("w1_distance matches the dense LP on non-uniform measures") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 40; ++rep) {
    std::uniform_int_distribution<int> size(1, 6);
    const auto a = random_measure(rng, static_cast<std::size_t>(size(rng)), 3);
    const auto b = random_measure(rng, static_cast<std::size_t>(size(rng)), 3);
    const auto plan = w1_distance(a, b, GroundMetric::l1());
    CHECK(std::abs(plan.cost - w1_dense_lp(a, b, GroundMetric::l1())) <= 1e-9);
    check_marginals(plan, GroundMetric::l1());
  }
}

TEST_CASE("w1_distance matches the 1D CDF formula at larger sizes") {
  std::mt19937_64 rng(77);
  for (auto [n, m] : {std::pair{300, 250}, std::pair{1000, 1000}}) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> pa(static_cast<std::size_t>(n));
    std::vector<double> pb(static_cast<std::size_t>(m));
    for (double& x : pa) x = g(rng);
    for (double& x : pb) x = 0.5 + 0.7 * g(rng);
    const auto a = DiscreteMeasure::uniform(pa, 1);
    const auto b = DiscreteMeasure::uniform(pb, 1);
    const auto plan = w1_distance(a, b, GroundMetric::l1());
    CHECK(plan.cost == doctest::Approx(barycoal::testing::w1_line_cdf(a, b)).epsilon(1e-9));
    check_marginals(plan, GroundMetric::l1());
  }
}

TEST_CASE("w1_distance is deterministic") {
  std::mt19937_64 rng(3);
  const auto a = random_uniform_measure(rng, 40, 2);
  const auto b = random_uniform_measure(rng, 40, 2);
  const auto p1 = w1_distance(a, b, GroundMetric::l2());
  const auto p2 = w1_distance(a, b, GroundMetric::l2());
  CHECK(p1.coupling == p2.coupling);
  CHECK(p1.cost == p2.cost);
}

TEST_CASE("w1_distance errors") {
  CHECK_THROWS_AS(w1_distance(dirac({0.0}), dirac({0.0, 1.0}), GroundMetric::l1()), std::invalid_argument);
}

TEST_CASE("w1 obeys the metric axioms on random triples") {
  std::mt19937_64 rng(19);
  for (int rep = 0; rep < 30; ++rep) {
    const auto a = random_measure(rng, 4, 2);
    const auto b = random_measure(rng, 5, 2);
    const auto c = random_measure(rng, 3, 2);
    const auto metric = GroundMetric::l2();
    const double ab = w1_distance(a, b, metric).cost;
    const double ba = w1_distance(b, a, metric).cost;
    const double bc = w1_distance(b, c, metric).cost;
    const double ac = w1_distance(a, c, metric).cost;
    CHECK(std::abs(ab - ba) <= 1e-9);
    CHECK(ac <= ab + bc + 1e-9);
    CHECK(std::abs(w1_distance(a, a, metric).cost) <= 1e-12);
  }
}

TEST_CASE("w1_bruteforce_uniform examples and errors") {
  const auto metric = GroundMetric::l1();
  const auto three = DiscreteMeasure::uniform({0, 0, 1, 0, 0.5, 2}, 2);
  CHECK(w1_bruteforce_uniform(three, three, metric) == 0.0);
  const auto lower = DiscreteMeasure::uniform({0, 0, 1, 0}, 2);
  const auto upper = DiscreteMeasure::uniform({0, 1, 1, 1}, 2);
  CHECK(w1_bruteforce_uniform(lower, upper, metric) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(w1_bruteforce_uniform(dirac({0, 0}), dirac({1, 1}), metric) == 2.0);

  CHECK_THROWS_AS(w1_bruteforce_uniform(DiscreteMeasure({0.0, 1.0}, 1, {0.25, 0.75}),
                                        DiscreteMeasure::uniform({0.0, 1.0}, 1), metric),
                  std::invalid_argument);
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(w1_bruteforce_uniform(random_uniform_measure(rng, 9, 1),
                                        random_uniform_measure(rng, 9, 1), metric),
                  std::invalid_argument);
  CHECK_THROWS_AS(w1_bruteforce_uniform(lower, three, metric), std::invalid_argument);
}

TEST_CASE("c_transform") {
  const auto metric = GroundMetric::l1();
  DualPotential zero{{0, 0, 1, 0, 0, 1}, 2, {0, 0, 0}};
  for (double v : c_transform(zero, metric).values) CHECK(v == 0.0);

  DualPotential lip{{0, 0, 1, 0, 0, 1, 1, 1}, 2, {0.0, 0.7, -0.4, 0.3}};
  REQUIRE(lipschitz_violation(lip, metric) == 0.0);
  const auto neg = c_transform(lip, metric);
  for (std::size_t i = 0; i < lip.size(); ++i) CHECK(neg.values[i] == -lip.values[i]);

  DualPotential bad{{0, 0, 1, 0, 0, 1, 1, 1}, 2, {0.0, 3.0, -0.4, 0.9}};
  CHECK(lipschitz_violation(bad, metric) > 0.0);
  CHECK(lipschitz_violation(c_transform(bad, metric), metric) <= 1e-12);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int rep = 0; rep < 20; ++rep) {
    DualPotential phi;
    phi.dim = 2;
    for (int i = 0; i < 6; ++i) {
      phi.points.push_back(u(rng));
      phi.points.push_back(u(rng));
      phi.values.push_back(u(rng));
    }
    CHECK(lipschitz_violation(c_transform(phi, GroundMetric::l2()), GroundMetric::l2()) <= 1e-12);
  }
}

TEST_CASE("Kantorovich duality: feasible potentials lower-bound W1, the LP duals attain it") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int rep = 0; rep < 30; ++rep) {
    const auto a = random_measure(rng, 5, 2);
    const auto b = random_measure(rng, 6, 2);
    for (const auto& metric : {GroundMetric::l1(), GroundMetric::l2()}) {
      const auto plan = w1_distance(a, b, metric);
      const auto star = optimal_potential(plan, metric);
      CHECK(lipschitz_violation(star, metric) <= 1e-9);
      CHECK(std::abs(dual_objective(star, a, b) - plan.cost) <= 1e-6);

      // Random feasible potential: random values made 1-Lipschitz by the
      // c-transform, then negated back.
      DualPotential phi = star;
      for (double& v : phi.values) v = u(rng);
      DualPotential feasible = c_transform(c_transform(phi, metric), metric);
      CHECK(lipschitz_violation(feasible, metric) <= 1e-12);
      CHECK(dual_objective(feasible, a, b) <= plan.cost + 1e-9);
    }
  }
}

TEST_CASE("displacement_interpolate endpoints and Dirac midpoint") {
  const auto metric = GroundMetric::l1();
  std::mt19937_64 rng(4);
  const auto a = random_measure(rng, 5, 2);
  const auto b = random_measure(rng, 4, 2);
  const auto plan = w1_distance(a, b, metric);
  CHECK(same_measure(displacement_interpolate(plan, 0.0), a, 1e-12));
  CHECK(same_measure(displacement_interpolate(plan, 1.0), b, 1e-12));
  CHECK_THROWS_AS(displacement_interpolate(plan, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(displacement_interpolate(plan, 1.5), std::invalid_argument);

  const auto dplan = w1_distance(dirac({0, 0}), dirac({1, 1}), metric);
  const auto mid = displacement_interpolate(dplan, 0.5);
  REQUIRE(mid.size() == 1);
  CHECK(mid.point(0)[0] == 0.5);
  CHECK(mid.point(0)[1] == 0.5);
  CHECK(w1_distance(dirac({0, 0}), mid, metric).cost == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(w1_distance(mid, dirac({1, 1}), metric).cost == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("displacement_interpolate merges coincident atoms") {
  // Two atoms at 0 and 2 both sent to 1: at t = 1 they coincide.
  const DiscreteMeasure a({0.0, 2.0}, 1, {0.5, 0.5});
  const auto plan = w1_distance(a, dirac({1.0}), GroundMetric::l1());
  const auto end = displacement_interpolate(plan, 1.0);
  CHECK(end.size() == 1);
  CHECK(end.weight(0) == doctest::Approx(1.0));
}

TEST_CASE("displacement interpolation is additive along the path") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0, 1);
  for (int rep = 0; rep < 20; ++rep) {
    const auto a = random_measure(rng, 5, 2);
    const auto b = random_measure(rng, 5, 2);
    for (const auto& metric : {GroundMetric::l1(), GroundMetric::l2()}) {
      const auto plan = w1_distance(a, b, metric);
      double t1 = u(rng);
      double t2 = u(rng);
      if (t1 > t2) std::swap(t1, t2);
      const auto s1 = displacement_interpolate(plan, t1);
      const auto s2 = displacement_interpolate(plan, t2);
      CHECK(std::abs(w1_distance(s1, s2, metric).cost - (t2 - t1) * plan.cost) <= 1e-6);
      CHECK(std::abs(w1_distance(a, s1, metric).cost - t1 * plan.cost) <= 1e-6);
      CHECK(std::abs(w1_distance(s2, b, metric).cost - (1 - t2) * plan.cost) <= 1e-6);
    }
  }
}

TEST_CASE("geodesic_gap") {
  const auto metric = GroundMetric::l1();
  std::mt19937_64 rng(6);
  const auto a = random_measure(rng, 4, 2);
  const auto b = random_measure(rng, 6, 2);
  const auto mid = displacement_interpolate(w1_distance(a, b, metric), 0.3);
  CHECK(geodesic_gap(a, mid, b, metric) <= 1e-6);
  CHECK(geodesic_gap(a, mid, b, metric) >= -1e-9);
  CHECK(std::abs(geodesic_gap(a, a, b, metric)) <= 1e-12);
  CHECK(geodesic_gap(dirac({0, 0}), dirac({1, 0}), dirac({1, 1}), metric) == 0.0);
  CHECK(geodesic_gap(dirac({0, 0}), dirac({1, 0}), dirac({1, 1}), GroundMetric::l2()) ==
        doctest::Approx(2.0 - std::sqrt(2.0)));
  CHECK_THROWS_AS(geodesic_gap(a, dirac({0.0}), b, metric), std::invalid_argument);
}
