// Copyright 2026 The barycoal Authors
// SPDX-License-Identifier: Apache-2.0

#include "barycoal/autodiff.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace barycoal::ad {

void Node::accumulate(const Eigen::MatrixXd& g) {
  if (grad.size() == 0) {
    grad = g;
  } else {
    grad += g;
  }
}

Eigen::MatrixXd Tensor::grad() const {
  if (node_->grad.size() == 0) return Eigen::MatrixXd::Zero(rows(), cols());
  return node_->grad;
}

double Tensor::item() const {
  if (rows() != 1 || cols() != 1) throw std::invalid_argument("item: tensor is not 1 x 1");
  return node_->value(0, 0);
}

Tensor constant(Eigen::MatrixXd value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return Tensor(std::move(n));
}

Tensor parameter(Eigen::MatrixXd value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  return Tensor(std::move(n));
}

Tensor make_op(Eigen::MatrixXd value, std::vector<Tensor> inputs, std::function<void(Node&)> backprop) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  for (const auto& t : inputs) {
    n->requires_grad = n->requires_grad || t.requires_grad();
    n->inputs.push_back(t.node());
  }
  if (n->requires_grad) n->backprop = std::move(backprop);
  return Tensor(std::move(n));
}

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()) + ")");
  }
}

Node& in(Node& n, std::size_t i) { return *n.inputs[i]; }

template <class F>
Tensor unary_elementwise(const Tensor& a, Eigen::MatrixXd value, F derivative) {
  return make_op(std::move(value), {a}, [derivative](Node& n) {
    Node& x = in(n, 0);
    if (x.requires_grad) x.accumulate(n.grad.cwiseProduct(derivative(x.value, n.value)));
  });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
  return make_op(a.value() * b.value(), {a, b}, [](Node& n) {
    Node& x = in(n, 0);
    Node& y = in(n, 1);
    if (x.requires_grad) x.accumulate(n.grad * y.value.transpose());
    if (y.requires_grad) y.accumulate(x.value.transpose() * n.grad);
  });
}

Tensor matmul_bt(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("matmul_bt: inner dimensions differ");
  return make_op(a.value() * b.value().transpose(), {a, b}, [](Node& n) {
    Node& x = in(n, 0);
    Node& y = in(n, 1);
    if (x.requires_grad) x.accumulate(n.grad * y.value);
    if (y.requires_grad) y.accumulate(n.grad.transpose() * x.value);
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  return make_op(a.value() + b.value(), {a, b}, [](Node& n) {
    if (in(n, 0).requires_grad) in(n, 0).accumulate(n.grad);
    if (in(n, 1).requires_grad) in(n, 1).accumulate(n.grad);
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  return make_op(a.value() - b.value(), {a, b}, [](Node& n) {
    if (in(n, 0).requires_grad) in(n, 0).accumulate(n.grad);
    if (in(n, 1).requires_grad) in(n, 1).accumulate(-n.grad);
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  return make_op(a.value().cwiseProduct(b.value()), {a, b}, [](Node& n) {
    Node& x = in(n, 0);
    Node& y = in(n, 1);
    if (x.requires_grad) x.accumulate(n.grad.cwiseProduct(y.value));
    if (y.requires_grad) y.accumulate(n.grad.cwiseProduct(x.value));
  });
}

Tensor add_row(const Tensor& a, const Tensor& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) throw std::invalid_argument("add_row: shape mismatch");
  Eigen::MatrixXd v = a.value();
  v.rowwise() += row.value().row(0);
  return make_op(std::move(v), {a, row}, [](Node& n) {
    if (in(n, 0).requires_grad) in(n, 0).accumulate(n.grad);
    if (in(n, 1).requires_grad) in(n, 1).accumulate(n.grad.colwise().sum());
  });
}

Tensor scale(const Tensor& a, double s) {
  return make_op(a.value() * s, {a}, [s](Node& n) {
    if (in(n, 0).requires_grad) in(n, 0).accumulate(n.grad * s);
  });
}

Tensor add_scalar(const Tensor& a, double s) {
  return make_op(a.value().array() + s, {a}, [](Node& n) {
    if (in(n, 0).requires_grad) in(n, 0).accumulate(n.grad);
  });
}

Tensor relu(const Tensor& a) {
  return unary_elementwise(a, a.value().cwiseMax(0.0), [](const Eigen::MatrixXd& x, const Eigen::MatrixXd&) {
    return Eigen::MatrixXd((x.array() > 0.0).cast<double>());
  });
}

Tensor leaky_relu(const Tensor& a, double slope) {
  Eigen::MatrixXd v = (a.value().array() > 0.0).select(a.value(), slope * a.value());
  return unary_elementwise(a, std::move(v), [slope](const Eigen::MatrixXd& x, const Eigen::MatrixXd&) {
    return Eigen::MatrixXd((x.array() > 0.0).select(Eigen::MatrixXd::Ones(x.rows(), x.cols()),
                                                    Eigen::MatrixXd::Constant(x.rows(), x.cols(), slope)));
  });
}

Tensor tanh(const Tensor& a) {
  return unary_elementwise(a, a.value().array().tanh().matrix(),
                           [](const Eigen::MatrixXd&, const Eigen::MatrixXd& y) {
                             return Eigen::MatrixXd(1.0 - y.array().square());
                           });
}

Tensor square(const Tensor& a) {
  return unary_elementwise(a, a.value().array().square().matrix(),
                           [](const Eigen::MatrixXd& x, const Eigen::MatrixXd&) { return Eigen::MatrixXd(2.0 * x); });
}

Tensor row_sum(const Tensor& a) {
  return make_op(a.value().rowwise().sum(), {a}, [](Node& n) {
    Node& x = in(n, 0);
    if (x.requires_grad) x.accumulate(n.grad.replicate(1, x.value.cols()));
  });
}

Tensor row_norm(const Tensor& a) {
  return make_op(a.value().rowwise().norm(), {a}, [](Node& n) {
    Node& x = in(n, 0);
    if (!x.requires_grad) return;
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(x.value.rows(), x.value.cols());
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      const double r = n.value(i, 0);
      if (r > 0.0) g.row(i) = x.value.row(i) * (n.grad(i, 0) / r);
    }
    x.accumulate(g);
  });
}

Tensor sum(const Tensor& a) {
  Eigen::MatrixXd v(1, 1);
  v(0, 0) = a.value().sum();
  return make_op(std::move(v), {a}, [](Node& n) {
    Node& x = in(n, 0);
    if (x.requires_grad) x.accumulate(Eigen::MatrixXd::Constant(x.value.rows(), x.value.cols(), n.grad(0, 0)));
  });
}

Tensor mean(const Tensor& a) {
  if (a.value().size() == 0) throw std::invalid_argument("mean: empty tensor");
  const double count = static_cast<double>(a.value().size());
  Eigen::MatrixXd v(1, 1);
  v(0, 0) = a.value().sum() / count;
  return make_op(std::move(v), {a}, [count](Node& n) {
    Node& x = in(n, 0);
    if (x.requires_grad) {
      x.accumulate(Eigen::MatrixXd::Constant(x.value.rows(), x.value.cols(), n.grad(0, 0) / count));
    }
  });
}

Tensor softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
  const Eigen::Index rows = logits.rows();
  const Eigen::Index classes = logits.cols();
  if (static_cast<Eigen::Index>(labels.size()) != rows || rows == 0) {
    throw std::invalid_argument("softmax_cross_entropy: one label per row required");
  }
  Eigen::MatrixXd probs(rows, classes);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= classes) throw std::invalid_argument("softmax_cross_entropy: label out of range");
    const double mx = logits.value().row(i).maxCoeff();
    const Eigen::RowVectorXd e = (logits.value().row(i).array() - mx).exp();
    const double z = e.sum();
    probs.row(i) = e / z;
    loss += std::log(z) + mx - logits.value()(i, y);
  }
  Eigen::MatrixXd v(1, 1);
  v(0, 0) = loss / static_cast<double>(rows);
  return make_op(std::move(v), {logits}, [probs, labels](Node& n) {
    Node& x = in(n, 0);
    if (!x.requires_grad) return;
    Eigen::MatrixXd g = probs;
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
    x.accumulate(g * (n.grad(0, 0) / static_cast<double>(g.rows())));
  });
}

void backward(const Tensor& loss) {
  if (!loss || loss.rows() != 1 || loss.cols() != 1) {
    throw std::invalid_argument("backward: loss must be a 1 x 1 tensor");
  }
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS over nodes that carry gradient.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.node().get(), 0}};
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss.node()->accumulate(Eigen::MatrixXd::Ones(1, 1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backprop && n->grad.size() != 0) n->backprop(*n);
  }
}

}  // namespace barycoal::ad
