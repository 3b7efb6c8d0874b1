// Copyright 2026 The barycoal Authors
// SPDX-License-Identifier: Apache-2.0

#include "barycoal/transport_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace barycoal {
namespace {

constexpr int kUp = 1;     // tree arc points from node to parent
constexpr int kDown = -1;  // tree arc points from parent to node
constexpr int kLower = 1;
constexpr int kTree = 0;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Bipartite network: supply nodes [0, n), demand nodes [n, n + m), root n + m.
// Arc e < n*m is (e / m) -> n + e % m; arc n*m + u is the artificial arc of u.
class NetworkSimplex {
 public:
  NetworkSimplex(std::span<const double> supply, std::span<const double> demand,
                 const Eigen::MatrixXd& cost)
      : n_(static_cast<int>(supply.size())),
        m_(static_cast<int>(demand.size())),
        nodes_(n_ + m_ + 1),
        root_(n_ + m_),
        search_arcs_(static_cast<long>(n_) * m_),
        cost_(static_cast<std::size_t>(search_arcs_)) {
    double max_cost = 0.0;
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < m_; ++j) {
        const double c = cost(i, j);
        cost_[static_cast<std::size_t>(i) * m_ + j] = c;
        max_cost = std::max(max_cost, std::abs(c));
      }
    }
    art_cost_ = (max_cost + 1.0) * nodes_;
    eps_ = 1e-12 * (1.0 + max_cost);

    const long all_arcs = search_arcs_ + n_ + m_;
    flow_.assign(static_cast<std::size_t>(all_arcs), 0.0);
    state_.assign(static_cast<std::size_t>(all_arcs), kLower);
    parent_.assign(nodes_, -1);
    pred_.assign(nodes_, -1);
    pred_dir_.assign(nodes_, 0);
    pi_.assign(nodes_, 0.0);
    first_child_.assign(nodes_, -1);
    next_sibling_.assign(nodes_, -1);
    prev_sibling_.assign(nodes_, -1);
    mark_.assign(nodes_, 0);

    // Strongly feasible initial tree: every node hangs off the root through
    // its artificial arc.
    for (int u = 0; u < n_ + m_; ++u) {
      const long e = search_arcs_ + u;
      state_[e] = kTree;
      parent_[u] = root_;
      pred_[u] = e;
      attach(u, root_);
      if (u < n_) {
        pred_dir_[u] = kUp;
        flow_[e] = supply[u];
        pi_[u] = 0.0;
      } else {
        pred_dir_[u] = kDown;
        flow_[e] = demand[u - n_];
        pi_[u] = art_cost_;
      }
    }
    block_size_ = std::max(10L, static_cast<long>(std::sqrt(static_cast<double>(search_arcs_))));
  }

  long run() {
    long pivots = 0;
    while (find_entering()) {
      pivot();
      ++pivots;
    }
    return pivots;
  }

  TransportSolution solution() const {
    TransportSolution out;
    out.flow.resize(n_, m_);
    double total = 0.0;
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < m_; ++j) {
        const std::size_t e = static_cast<std::size_t>(i) * m_ + j;
        const double f = std::max(flow_[e], 0.0);
        out.flow(i, j) = f;
        total += f * cost_[e];
      }
    }
    out.cost = total;
    out.row_dual.resize(n_);
    out.col_dual.resize(m_);
    // Shift so that the duals stay O(cost) instead of O(artificial cost).
    const double shift = n_ > 0 ? pi_[0] : 0.0;
    for (int i = 0; i < n_; ++i) out.row_dual[i] = -(pi_[i] - shift);
    for (int j = 0; j < m_; ++j) out.col_dual[j] = pi_[n_ + j] - shift;
    return out;
  }

 private:
  int source(long e) const {
    return e < search_arcs_ ? static_cast<int>(e / m_) : artificial_source(e);
  }
  int target(long e) const {
    return e < search_arcs_ ? n_ + static_cast<int>(e % m_) : artificial_target(e);
  }
  int artificial_source(long e) const {
    const int u = static_cast<int>(e - search_arcs_);
    return u < n_ ? u : root_;
  }
  int artificial_target(long e) const {
    const int u = static_cast<int>(e - search_arcs_);
    return u < n_ ? root_ : u;
  }
  double arc_cost(long e) const {
    if (e < search_arcs_) return cost_[static_cast<std::size_t>(e)];
    return e - search_arcs_ < n_ ? 0.0 : art_cost_;
  }
  double reduced_cost(long e) const { return arc_cost(e) + pi_[source(e)] - pi_[target(e)]; }

  void attach(int u, int p) {
    prev_sibling_[u] = -1;
    next_sibling_[u] = first_child_[p];
    if (first_child_[p] >= 0) prev_sibling_[first_child_[p]] = u;
    first_child_[p] = u;
  }

  void detach(int u, int p) {
    if (prev_sibling_[u] >= 0) {
      next_sibling_[prev_sibling_[u]] = next_sibling_[u];
    } else {
      first_child_[p] = next_sibling_[u];
    }
    if (next_sibling_[u] >= 0) prev_sibling_[next_sibling_[u]] = prev_sibling_[u];
    prev_sibling_[u] = next_sibling_[u] = -1;
  }

  // Block search pricing over the original arcs in cyclic order.
  bool find_entering() {
    double best = -eps_;
    long count = block_size_;
    long e = next_arc_;
    for (long scanned = 0; scanned < search_arcs_; ++scanned) {
      const int i = static_cast<int>(e / m_);
      const int j = static_cast<int>(e % m_);
      const double rc = cost_[static_cast<std::size_t>(e)] + pi_[i] - pi_[n_ + j];
      if (rc < best) {
        best = rc;
        in_arc_ = e;
      }
      if (++e == search_arcs_) e = 0;
      if (--count == 0) {
        if (best < -eps_) {
          next_arc_ = e;
          return true;
        }
        count = block_size_;
      }
    }
    if (best < -eps_) {
      next_arc_ = e;
      return true;
    }
    return false;
  }

  int find_join(int u, int v) {
    ++stamp_;
    for (int x = u; x >= 0; x = parent_[x]) mark_[x] = stamp_;
    int x = v;
    while (mark_[x] != stamp_) x = parent_[x];
    return x;
  }

  void pivot() {
    const int first = source(in_arc_);
    const int second = target(in_arc_);
    const int join = find_join(first, second);

    // Leaving arc: last blocking arc along the cycle oriented from the join.
    double delta = kInf;
    int u_out = -1;
    int side = 0;
    for (int u = first; u != join; u = parent_[u]) {
      const double d = pred_dir_[u] == kUp ? std::max(flow_[pred_[u]], 0.0) : kInf;
      if (d < delta) {
        delta = d;
        u_out = u;
        side = 1;
      }
    }
    for (int u = second; u != join; u = parent_[u]) {
      const double d = pred_dir_[u] == kDown ? std::max(flow_[pred_[u]], 0.0) : kInf;
      if (d <= delta) {
        delta = d;
        u_out = u;
        side = 2;
      }
    }
    if (u_out < 0) throw std::logic_error("transport simplex: unbounded cycle");

    if (delta > 0.0) {
      flow_[in_arc_] += delta;
      for (int u = first; u != join; u = parent_[u]) flow_[pred_[u]] -= pred_dir_[u] * delta;
      for (int u = second; u != join; u = parent_[u]) flow_[pred_[u]] += pred_dir_[u] * delta;
    }

    const int u_in = side == 1 ? first : second;
    const int v_in = side == 1 ? second : first;
    const long leaving = pred_[u_out];

    // Re-hang the subtree of u_out from v_in by reversing the path u_in..u_out.
    int cur = u_in;
    int new_parent = v_in;
    long new_pred = in_arc_;
    while (true) {
      const int old_parent = parent_[cur];
      const long old_pred = pred_[cur];
      detach(cur, old_parent);
      attach(cur, new_parent);
      parent_[cur] = new_parent;
      pred_[cur] = new_pred;
      pred_dir_[cur] = source(new_pred) == cur ? kUp : kDown;
      if (cur == u_out) break;
      new_parent = cur;
      new_pred = old_pred;
      cur = old_parent;
    }
    state_[in_arc_] = kTree;
    state_[leaving] = kLower;
    flow_[leaving] = 0.0;

    // Potentials of the moved subtree shift by a constant.
    const double sigma = pi_[v_in] - pi_[u_in] - pred_dir_[u_in] * arc_cost(in_arc_);
    if (sigma != 0.0) {
      stack_.clear();
      stack_.push_back(u_in);
      while (!stack_.empty()) {
        const int x = stack_.back();
        stack_.pop_back();
        pi_[x] += sigma;
        for (int c = first_child_[x]; c >= 0; c = next_sibling_[c]) stack_.push_back(c);
      }
    }
  }

  int n_;
  int m_;
  int nodes_;
  int root_;
  long search_arcs_;
  std::vector<double> cost_;
  double art_cost_ = 0.0;
  double eps_ = 0.0;

  std::vector<double> flow_;
  std::vector<int> state_;
  std::vector<int> parent_;
  std::vector<long> pred_;
  std::vector<int> pred_dir_;
  std::vector<double> pi_;
  std::vector<int> first_child_;
  std::vector<int> next_sibling_;
  std::vector<int> prev_sibling_;
  std::vector<long> mark_;
  long stamp_ = 0;
  std::vector<int> stack_;

  long block_size_ = 10;
  long next_arc_ = 0;
  long in_arc_ = -1;
};

}  // namespace

TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  const Eigen::MatrixXd& cost) {
  if (supply.empty() || demand.empty()) {
    throw std::invalid_argument("solve_transport: empty marginal");
  }
  if (cost.rows() != static_cast<Eigen::Index>(supply.size()) ||
      cost.cols() != static_cast<Eigen::Index>(demand.size())) {
    throw std::invalid_argument("solve_transport: cost matrix shape mismatch");
  }
  NetworkSimplex solver(supply, demand, cost);
  const long pivots = solver.run();
  TransportSolution out = solver.solution();
  out.pivots = pivots;
  return out;
}

}  // namespace barycoal
