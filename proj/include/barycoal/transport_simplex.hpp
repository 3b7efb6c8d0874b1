// Copyright 2026 The barycoal Authors
// SPDX-License-Identifier: Apache-2.0
//
// Network simplex for the balanced transportation problem
//
//   min <C, F>  s.t.  F 1 = supply,  F^T 1 = demand,  F >= 0.
//
// The basis is a strongly feasible spanning tree rooted at an artificial
// node, which rules out cycling on the (highly degenerate) assignment-like
// instances produced by uniform empirical measures. Pricing is a block
// search over arcs in a fixed cyclic order, so runs are deterministic.

#pragma once

#include <Eigen/Dense>

#include <span>

namespace barycoal {

struct TransportSolution {
  Eigen::MatrixXd flow;
  double cost = 0.0;
  Eigen::VectorXd row_dual;  // u_i
  Eigen::VectorXd col_dual;  // v_j, with u_i + v_j <= C_ij
  long pivots = 0;
};

TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  const Eigen::MatrixXd& cost);

}  // namespace barycoal
