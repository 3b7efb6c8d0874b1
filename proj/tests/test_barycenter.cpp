// Copyright 2026 The barycoal Authors
// SPDX-License-Identifier: Apache-2.0

#include "barycoal/barycenter.hpp"
#include "barycoal/error.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <random>

using namespace barycoal;
using barycoal::testing::dirac;
using barycoal::testing::random_measure;

namespace {

std::vector<DiscreteMeasure> corners() {
  return {dirac({0, 0}), dirac({1, 0}), dirac({0, 1}), dirac({1, 1})};
}

std::vector<WeightedMeasure> equally_weighted(const std::vector<DiscreteMeasure>& ms, double w = 1.0) {
  std::vector<WeightedMeasure> out;
  for (const auto& m : ms) out.push_back({m, w});
  return out;
}

// Union of input supports.
std::vector<double> union_support(const std::vector<DiscreteMeasure>& ms) {
  std::vector<double> s;
  for (const auto& m : ms) s.insert(s.end(), m.points().begin(), m.points().end());
  return s;
}

}  // namespace

TEST_CASE("lagrangian_weights are reciprocal radii") {
  const auto m = dirac({0.0});
  const auto w = lagrangian_weights({{m, 1.0}, {m, 2.0}, {m, 4.0}});
  REQUIRE(w.size() == 3);
  CHECK(w[0].weight == 1.0);
  CHECK(w[1].weight == 0.5);
  CHECK(w[2].weight == 0.25);
  CHECK(lagrangian_weights({{m, 1.0}})[0].weight == 1.0);
  CHECK(lagrangian_weights({{m, 0.1}})[0].weight == 1.0 / 0.1);
  CHECK_THROWS_AS(WassersteinBallConstraint(m, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(WassersteinBallConstraint(m, -1.0), std::invalid_argument);
}

TEST_CASE("barycenter_objective examples") {
  const auto metric = GroundMetric::l1();
  std::mt19937_64 rng(1);
  const auto mu = random_measure(rng, 5, 2);
  CHECK(barycenter_objective(mu, BarycenterProblem({{mu, 1.0}}, mu.points(), 2, metric)) == 0.0);

  const BarycenterProblem four(equally_weighted(corners()), {0.5, 0.5}, 2, metric);
  // Separable oracle: sum over corners of |x - 0.5| + |y - 0.5|.
  double separable = 0.0;
  for (const auto& c : corners()) separable += std::abs(c.point(0)[0] - 0.5) + std::abs(c.point(0)[1] - 0.5);
  CHECK(barycenter_objective(dirac({0.5, 0.5}), four) == doctest::Approx(separable).epsilon(1e-15));
  CHECK(separable == 4.0);

  const BarycenterProblem pair({{dirac({0, 0}), 1.0}, {dirac({1, 1}), 1.0}}, {1, 0}, 2, metric);
  CHECK(barycenter_objective(dirac({1, 0}), pair) == 2.0);
  CHECK_THROWS_AS(barycenter_objective(dirac({1.0}), pair), std::invalid_argument);
}

TEST_CASE("BarycenterProblem validation") {
  const auto m = dirac({0, 0});
  CHECK_THROWS_AS(BarycenterProblem({}, {0, 0}, 2, GroundMetric::l1()), std::invalid_argument);
  CHECK_THROWS_AS(BarycenterProblem({{m, 0.0}}, {0, 0}, 2, GroundMetric::l1()), std::invalid_argument);
  CHECK_THROWS_AS(BarycenterProblem({{m, 1.0}}, {}, 2, GroundMetric::l1()), std::invalid_argument);
  CHECK_THROWS_AS(BarycenterProblem({{m, 1.0}}, {0, 0, 0}, 3, GroundMetric::l1()), std::invalid_argument);
}

TEST_CASE("fixed_support_barycenter: single input reproduces itself") {
  std::mt19937_64 rng(2);
  const auto mu = random_measure(rng, 6, 2);
  auto support = mu.points();
  support.insert(support.end(), {0.3, 0.3, 0.9, 0.1});
  const auto res = fixed_support_barycenter(BarycenterProblem({{mu, 1.0}}, support, 2, GroundMetric::l2()));
  CHECK(std::abs(res.objective) <= 1e-9);
  CHECK(same_measure(res.nu, mu, 1e-9));
}

TEST_CASE("fixed_support_barycenter: four corners on the default grid") {
  const auto cs = corners();
  const auto grid = default_grid_support(cs);
  CHECK(grid.size() == 121 * 2);
  const BarycenterProblem problem(equally_weighted(cs), grid, 2, GroundMetric::l1());
  const auto res = fixed_support_barycenter(problem);
  CHECK(std::abs(res.objective - 4.0) <= 1e-6);
  CHECK(std::abs(barycenter_objective(res.nu, problem) - res.objective) <= 1e-6);
  // Any single grid point of the unit square is optimal.
  for (std::size_t s = 0; s < 121; s += 7) {
    CHECK(std::abs(barycenter_objective(dirac({grid[2 * s], grid[2 * s + 1]}), problem) - 4.0) <= 1e-12);
  }
}

TEST_CASE("fixed_support_barycenter: weighted Dirac pair collapses to min weight times W1") {
  const std::vector<DiscreteMeasure> ends{dirac({0, 0}), dirac({1, 1})};
  const BarycenterProblem problem({{ends[0], 3.0}, {ends[1], 1.0}}, default_grid_support(ends), 2,
                                  GroundMetric::l1());
  const auto res = fixed_support_barycenter(problem);
  CHECK(std::abs(res.objective - 2.0) <= 1e-6);
  // The higher-weight endpoint is among the optima.
  CHECK(barycenter_objective(ends[0], problem) == 2.0);
}

TEST_CASE("degeneracy law for two weighted inputs") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> lam(0.1, 3.0);
  for (int rep = 0; rep < 15; ++rep) {
    const auto a = random_measure(rng, 4, 2);
    const auto b = random_measure(rng, 3, 2);
    const double l1 = lam(rng);
    const double l2 = lam(rng);
    for (const auto& metric : {GroundMetric::l1(), GroundMetric::l2()}) {
      const BarycenterProblem problem({{a, l1}, {b, l2}}, union_support({a, b}), 2, metric);
      const auto res = fixed_support_barycenter(problem);
      const double expected = std::min(l1, l2) * w1_distance(a, b, metric).cost;
      CHECK(std::abs(res.objective - expected) <= 1e-6);
      CHECK(std::abs(barycenter_objective(res.nu, problem) - res.objective) <= 1e-6);
    }
  }
}

TEST_CASE("LP optimum lower-bounds the objective of other measures on the support") {
  std::mt19937_64 rng(41);
  const std::vector<DiscreteMeasure> ms{random_measure(rng, 3, 2), random_measure(rng, 3, 2),
                                        random_measure(rng, 3, 2)};
  const auto support = default_grid_support(ms, 5);
  const BarycenterProblem problem({{ms[0], 1.0}, {ms[1], 0.7}, {ms[2], 1.3}}, support, 2,
                                  GroundMetric::l2());
  const auto res = fixed_support_barycenter(problem);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> w(support.size() / 2);
    for (double& x : w) x = u(rng) < 0.2 ? u(rng) : 0.0;
    w[rep % w.size()] += 0.5;
    const auto other = DiscreteMeasure::normalized(support, 2, w);
    CHECK(res.objective <= barycenter_objective(other, problem) + 1e-6);
  }
}

TEST_CASE("scaling all weights scales the optimum and keeps the argmin") {
  std::mt19937_64 rng(43);
  const std::vector<DiscreteMeasure> ms{random_measure(rng, 3, 2), random_measure(rng, 4, 2),
                                        random_measure(rng, 2, 2)};
  const auto support = default_grid_support(ms, 6);
  const std::vector<double> lambdas{1.0, 2.0, 0.5};
  for (double c : {0.25, 3.0}) {
    std::vector<WeightedMeasure> base;
    std::vector<WeightedMeasure> scaled;
    for (std::size_t k = 0; k < ms.size(); ++k) {
      base.push_back({ms[k], lambdas[k]});
      scaled.push_back({ms[k], c * lambdas[k]});
    }
    const BarycenterProblem pb(base, support, 2, GroundMetric::l1());
    const BarycenterProblem ps(scaled, support, 2, GroundMetric::l1());
    const auto rb = fixed_support_barycenter(pb);
    const auto rs = fixed_support_barycenter(ps);
    CHECK(std::abs(rs.objective - c * rb.objective) <= 1e-6);
    CHECK(std::abs(barycenter_objective(rb.nu, ps) - rs.objective) <= 1e-6);
    CHECK(std::abs(barycenter_objective(rs.nu, pb) - rb.objective) <= 1e-6);
  }
}

TEST_CASE("fixed_support_barycenter size limit") {
  std::mt19937_64 rng(5);
  const auto big = random_measure(rng, 64, 2);
  const BarycenterProblem problem({{big, 1.0}}, default_grid_support({big}, 9), 2, GroundMetric::l1());
  CHECK_THROWS_AS(fixed_support_barycenter(problem), std::invalid_argument);
}

TEST_CASE("default_grid_support spans the bounding box") {
  const auto grid = default_grid_support({dirac({-1, 2}), dirac({3, 4})}, 3);
  const std::vector<double> expected{-1, 2, -1, 3, -1, 4, 1, 2, 1, 3, 1, 4, 3, 2, 3, 3, 3, 4};
  CHECK(grid == expected);
  CHECK_THROWS_AS(default_grid_support({}), std::invalid_argument);
  CHECK_THROWS_AS(default_grid_support({dirac({0.0})}, 1), std::invalid_argument);
}

TEST_CASE("pairwise_step") {
  CHECK(pairwise_step(1.0, 1.0) == 0.5);
  CHECK(pairwise_step(3.0, 1.0) == 0.25);
  CHECK_THROWS_AS(pairwise_step(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("recursive_coalesce_lp") {
  const auto metric = GroundMetric::l1();
  const auto one = recursive_coalesce_lp({dirac({0, 0})}, {1.0}, metric);
  REQUIRE(one.size() == 1);
  CHECK(same_measure(one[0], dirac({0, 0})));

  const auto two = recursive_coalesce_lp({dirac({0, 0}), dirac({1, 1})}, {1.0, 1.0}, metric);
  REQUIRE(two.size() == 2);
  CHECK(same_measure(two[1], dirac({0.5, 0.5})));
  CHECK(w1_distance(two[1], dirac({0, 0}), metric).cost == doctest::Approx(1.0));
  CHECK(w1_distance(two[1], dirac({1, 1}), metric).cost == doctest::Approx(1.0));

  const std::vector<DiscreteMeasure> three_in{dirac({0, 0}), dirac({1, 0}), dirac({0, 1})};
  const auto three = recursive_coalesce_lp(three_in, {1.0, 1.0, 1.0}, metric);
  REQUIRE(three.size() == 3);
  CHECK(geodesic_gap(three[1], three[2], three_in[2], metric) <= 1e-6);
  // Accumulated weight 2 against 1: the third step moves a third of the way.
  CHECK(same_measure(three[2], dirac({0.5 * 2.0 / 3.0, 1.0 / 3.0})));

  CHECK_THROWS_AS(recursive_coalesce_lp({}, {}, metric), std::invalid_argument);
  CHECK_THROWS_AS(recursive_coalesce_lp({dirac({0.0})}, {1.0, 2.0}, metric), std::invalid_argument);
}

TEST_CASE("recursive outputs lie on geodesics at every step") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> lam(0.2, 2.0);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<DiscreteMeasure> ms;
    std::vector<double> ws;
    for (int k = 0; k < 4; ++k) {
      ms.push_back(random_measure(rng, 4, 2));
      ws.push_back(lam(rng));
    }
    for (const auto& metric : {GroundMetric::l1(), GroundMetric::l2()}) {
      const auto out = recursive_coalesce_lp(ms, ws, metric);
      CHECK(same_measure(out[0], ms[0]));
      for (std::size_t k = 1; k < ms.size(); ++k) {
        CHECK(geodesic_gap(out[k - 1], out[k], ms[k], metric) <= 1e-6);
      }
    }
  }
}

TEST_CASE("refined forming sets of the four-corner square") {
  const auto cs = corners();
  const auto diag = std::vector<DiscreteMeasure>{dirac({0, 0}), dirac({1, 1})};
  const auto anti = std::vector<DiscreteMeasure>{dirac({1, 0}), dirac({0, 1})};
  CHECK(refined_forming_set_check(diag, cs, GroundMetric::l1()) == true);
  CHECK(refined_forming_set_check(anti, cs, GroundMetric::l1()) == true);
  CHECK(refined_forming_set_check(diag, cs, GroundMetric::l2()) == false);
  CHECK(geodesic_gap(diag[0], dirac({1, 0}), diag[1], GroundMetric::l2()) ==
        doctest::Approx(2.0 - std::sqrt(2.0)));
  CHECK(refined_forming_set_check(cs, cs, GroundMetric::l2()) == true);
}
