// Copyright 2026 The barycoal Authors
// SPDX-License-Identifier: Apache-2.0

#include "barycoal/lp_simplex.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace barycoal {
namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-10;

class Tableau {
 public:
  // Columns [0, n) are structural, [n, n + m) artificial, the last is the RHS.
  Tableau(const LinearProgram& lp)
      : m_(lp.A.rows()), n_(lp.A.cols()), t_(Eigen::MatrixXd::Zero(m_ + 1, n_ + m_ + 1)),
        basis_(static_cast<std::size_t>(m_)), active_(static_cast<std::size_t>(m_), true) {
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double sign = lp.b[i] < 0.0 ? -1.0 : 1.0;
      t_.row(i).head(n_) = sign * lp.A.row(i);
      t_(i, n_ + i) = 1.0;
      t_(i, rhs()) = sign * lp.b[i];
      basis_[static_cast<std::size_t>(i)] = n_ + i;
    }
  }

  Eigen::Index rhs() const { return n_ + m_; }

  // Objective row holds reduced costs; its RHS entry holds -objective.
  void set_objective(const Eigen::VectorXd& cost) {
    t_.row(m_).setZero();
    t_.row(m_).head(cost.size()) = cost.transpose();
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (!active_[static_cast<std::size_t>(i)]) continue;
      const double cb = basis_[static_cast<std::size_t>(i)] < cost.size()
                            ? cost[basis_[static_cast<std::size_t>(i)]]
                            : 0.0;
      if (cb != 0.0) t_.row(m_) -= cb * t_.row(i);
    }
  }

  // Returns false when unbounded.
  bool optimize(Eigen::Index allowed_cols, long& pivots) {
    while (true) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < allowed_cols; ++j) {
        if (t_(m_, j) < -kCostTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      Eigen::Index leave = -1;
      double best_ratio = 0.0;
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (!active_[static_cast<std::size_t>(i)]) continue;
        const double a = t_(i, enter);
        if (a <= kPivotTol) continue;
        const double ratio = t_(i, rhs()) / a;
        if (leave < 0 || ratio < best_ratio - 1e-12 ||
            (std::abs(ratio - best_ratio) <= 1e-12 &&
             basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
          leave = i;
          best_ratio = ratio;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
      ++pivots;
    }
  }

  void pivot(Eigen::Index row, Eigen::Index col) {
    t_.row(row) /= t_(row, col);
    const Eigen::RowVectorXd pivot_row = t_.row(row);
    for (Eigen::Index i = 0; i <= m_; ++i) {
      if (i == row) continue;
      const double f = t_(i, col);
      if (f != 0.0) t_.row(i) -= f * pivot_row;
    }
    t_(row, col) = 1.0;
    basis_[static_cast<std::size_t>(row)] = col;
  }

  // After phase one: pivot basic artificials out on any structural column,
  // or retire the row when it is redundant.
  void expel_artificials(long& pivots) {
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < n_) continue;
      Eigen::Index col = -1;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (std::abs(t_(i, j)) > kPivotTol) {
          col = j;
          break;
        }
      }
      if (col >= 0) {
        pivot(i, col);
        ++pivots;
      } else {
        active_[static_cast<std::size_t>(i)] = false;
      }
    }
  }

  double objective_value() const { return -t_(m_, rhs()); }

  Eigen::VectorXd primal() const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (!active_[static_cast<std::size_t>(i)]) continue;
      const Eigen::Index v = basis_[static_cast<std::size_t>(i)];
      if (v < n_) x[v] = std::max(t_(i, rhs()), 0.0);
    }
    return x;
  }

  Eigen::Index structural() const { return n_; }
  Eigen::Index rows() const { return m_; }

 private:
  Eigen::Index m_;
  Eigen::Index n_;
  Eigen::MatrixXd t_;
  std::vector<Eigen::Index> basis_;
  std::vector<bool> active_;
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp) {
  if (lp.A.rows() != lp.b.size() || lp.A.cols() != lp.c.size()) {
    throw std::invalid_argument("solve_lp: inconsistent dimensions");
  }
  LpResult result;
  Tableau tab(lp);
  const Eigen::Index n = tab.structural();
  const Eigen::Index m = tab.rows();

  Eigen::VectorXd phase_one = Eigen::VectorXd::Zero(n + m);
  phase_one.tail(m).setOnes();
  tab.set_objective(phase_one);
  tab.optimize(n + m, result.pivots);
  if (tab.objective_value() > 1e-8) {
    result.status = LpStatus::Infeasible;
    return result;
  }
  tab.expel_artificials(result.pivots);

  tab.set_objective(lp.c);
  if (!tab.optimize(n, result.pivots)) {
    result.status = LpStatus::Unbounded;
    return result;
  }
  result.status = LpStatus::Optimal;
  result.x = tab.primal();
  result.objective = lp.c.dot(result.x);
  return result;
}

}  // namespace barycoal
