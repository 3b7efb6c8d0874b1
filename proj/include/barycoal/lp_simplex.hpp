// Copyright 2026 The barycoal Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dense two-phase tableau simplex for small standard-form LPs
//
//   min c.x  s.t.  A x = b,  x >= 0.
//
// Pivoting follows Bland's smallest-index rule for both the entering column
// and ties in the ratio test, so the pivot sequence (and therefore the
// returned vertex among multiple optima) is deterministic.

#pragma once

#include <Eigen/Dense>

namespace barycoal {

struct LinearProgram {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  long pivots = 0;
};

LpResult solve_lp(const LinearProgram& lp);

}  // namespace barycoal
