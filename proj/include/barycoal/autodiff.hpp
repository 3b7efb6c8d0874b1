// Copyright 2026 The barycoal Authors
// SPDX-License-Identifier: Apache-2.0
//
// Small reverse-mode autodiff over dense 2D matrices. A Tensor is a handle to
// a graph node; ops build new nodes, backward() walks them in reverse
// topological order. Higher-order derivatives are obtained by writing the
// first derivative as an ordinary graph (see gradient_penalty in mlp.hpp).

#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <vector>

namespace barycoal::ad {

struct Node {
  Eigen::MatrixXd value;
  Eigen::MatrixXd grad;  // empty until something flows in
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this->grad and accumulates into the inputs' grads.
  std::function<void(Node&)> backprop;
  bool requires_grad = false;

  void accumulate(const Eigen::MatrixXd& g);
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  const Eigen::MatrixXd& value() const { return node_->value; }
  Eigen::MatrixXd& mutable_value() { return node_->value; }
  // Zero matrix of the value's shape when no gradient reached this node.
  Eigen::MatrixXd grad() const;
  void zero_grad() { node_->grad.resize(0, 0); }
  bool requires_grad() const { return node_->requires_grad; }

  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  std::vector<Eigen::Index> shape() const { return {rows(), cols()}; }
  double item() const;

  const std::shared_ptr<Node>& node() const { return node_; }
  explicit operator bool() const { return static_cast<bool>(node_); }

 private:
  std::shared_ptr<Node> node_;
};

Tensor constant(Eigen::MatrixXd value);
Tensor parameter(Eigen::MatrixXd value);

// Escape hatch for ops defined outside this file.
Tensor make_op(Eigen::MatrixXd value, std::vector<Tensor> inputs, std::function<void(Node&)> backprop);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor matmul_bt(const Tensor& a, const Tensor& b);  // a * b^T
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor add_row(const Tensor& a, const Tensor& row);  // row (1 x n) broadcast over a's rows
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope);
Tensor tanh(const Tensor& a);
Tensor square(const Tensor& a);
Tensor row_sum(const Tensor& a);   // n x 1
Tensor row_norm(const Tensor& a);  // Euclidean norm of each row, n x 1; gradient 0 at the origin
Tensor sum(const Tensor& a);       // 1 x 1
Tensor mean(const Tensor& a);      // 1 x 1
// Mean softmax cross-entropy of logit rows against integer labels.
Tensor softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels);

// Seeds d(loss)/d(loss) = 1 and propagates. Throws std::invalid_argument
// unless loss is 1 x 1.
void backward(const Tensor& loss);

}  // namespace barycoal::ad
