// Copyright 2026 The barycoal Authors
// SPDX-License-Identifier: Apache-2.0

#include "barycoal/ternary.hpp"

#include "barycoal/error.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <set>
#include <stdexcept>

namespace barycoal {

namespace {

std::function<void(const std::string&)>& warning_handler() {
  static std::function<void(const std::string&)> handler = [](const std::string& m) {
    std::cerr << "warning: " << m << "\n";
  };
  return handler;
}

double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

}  // namespace

void set_warning_handler(std::function<void(const std::string&)> handler) {
  warning_handler() = std::move(handler);
}

void warn(const std::string& message) {
  if (warning_handler()) warning_handler()(message);
}

TernaryResult ternarize(const Eigen::MatrixXd& w, double delta) {
  if (delta < 0.0) throw std::invalid_argument("ternarize: threshold must be >= 0");
  TernaryResult r;
  double total = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double a = std::abs(w.data()[i]);
    if (a > delta) {
      total += a;
      lo = std::min(lo, a);
      hi = std::max(hi, a);
      ++count;
    }
  }
  r.values = Eigen::MatrixXd::Zero(w.rows(), w.cols());
  if (count == 0) {
    r.degenerate = true;
    return r;
  }
  // Equal magnitudes reproduce the magnitude exactly, free of summation rounding.
  r.scale = lo == hi ? hi : total / static_cast<double>(count);
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double x = w.data()[i];
    if (x > delta) r.values.data()[i] = r.scale;
    if (x < -delta) r.values.data()[i] = -r.scale;
  }
  return r;
}

bool TernaryLayerState::refresh() {
  const TernaryResult r = ternarize(weights, delta);
  scale = r.scale;
  return !r.degenerate;
}

Eigen::MatrixXd ternarize_layer(TernaryLayerState& state) {
  TernaryResult r = ternarize(state.weights, state.delta);
  state.scale = r.scale;
  if (r.degenerate) warn("ternary layer is degenerate: no weight exceeds the threshold, scale set to 0");
  return std::move(r.values);
}

Eigen::MatrixXd surrogate_ternary(const Eigen::MatrixXd& w, double delta, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("surrogate_ternary: tau must be positive");
  const Eigen::ArrayXXd a = w.array().abs();
  const Eigen::ArrayXXd s = ((a - delta) / tau).unaryExpr([](double x) { return sigmoid(x); });
  const double scale = (a * s).sum() / s.sum();
  return (scale * w.array().sign() * s).matrix();
}

double surrogate_delta_gradient(const Eigen::MatrixXd& w, double delta, double tau, const Eigen::MatrixXd& g) {
  if (!(tau > 0.0)) return 0.0;
  const Eigen::ArrayXXd a = w.array().abs();
  const Eigen::ArrayXXd s = ((a - delta) / tau).unaryExpr([](double x) { return sigmoid(x); });
  const Eigen::ArrayXXd ds = -s * (1.0 - s) / tau;  // d sigma / d delta
  const double num = (a * s).sum();
  const double den = s.sum();
  const double scale = num / den;
  const double dscale = ((a * ds).sum() * den - num * ds.sum()) / (den * den);
  const Eigen::ArrayXXd dw = w.array().sign() * (dscale * s + scale * ds);
  return (g.array() * dw).sum();
}

ad::Tensor ternary_weight(const ad::Tensor& w, const ad::Tensor& delta, double width_fraction) {
  if (delta.rows() != 1 || delta.cols() != 1) throw std::invalid_argument("ternary_weight: delta must be 1 x 1");
  const double d = delta.value()(0, 0);
  Eigen::MatrixXd value = ternarize(w.value(), std::max(d, 0.0)).values;
  return ad::make_op(std::move(value), {w, delta}, [width_fraction](ad::Node& n) {
    ad::Node& wn = *n.inputs[0];
    ad::Node& dn = *n.inputs[1];
    const double max_abs = wn.value.cwiseAbs().maxCoeff();
    if (wn.requires_grad) {
      wn.accumulate((wn.value.array().abs() <= max_abs).select(n.grad, 0.0));
    }
    if (dn.requires_grad) {
      Eigen::MatrixXd g(1, 1);
      g(0, 0) = surrogate_delta_gradient(wn.value, dn.value(0, 0), width_fraction * max_abs, n.grad);
      dn.accumulate(g);
    }
  });
}

TernaryNetwork::TernaryNetwork(const MLPParams& full_precision, double init_fraction) : params(full_precision) {
  if (init_fraction < 0.0) throw std::invalid_argument("TernaryNetwork: init_fraction must be >= 0");
  for (const auto& l : params.layers) {
    deltas.push_back(ad::parameter(Eigen::MatrixXd::Constant(1, 1, init_fraction * l.weight.value().cwiseAbs().mean())));
  }
  refresh();
}

TernaryNetwork::TernaryNetwork(const TernaryNetwork& other) : params(other.params), scales(other.scales) {
  for (const auto& d : other.deltas) deltas.push_back(ad::parameter(d.value()));
}

TernaryNetwork& TernaryNetwork::operator=(const TernaryNetwork& other) {
  if (this != &other) {
    TernaryNetwork copy(other);
    *this = std::move(copy);
  }
  return *this;
}

int TernaryNetwork::refresh() {
  scales.assign(params.layers.size(), 0.0);
  int degenerate = 0;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const TernaryResult r = ternarize(params.layers[l].weight.value(), deltas[l].value()(0, 0));
    scales[l] = r.scale;
    if (r.degenerate) ++degenerate;
  }
  return degenerate;
}

std::vector<TernaryLayerState> TernaryNetwork::states() const {
  std::vector<TernaryLayerState> out;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    out.push_back({params.layers[l].weight.value(), deltas[l].value()(0, 0), scales[l]});
  }
  return out;
}

std::vector<Eigen::MatrixXd> TernaryNetwork::quantized() const {
  std::vector<Eigen::MatrixXd> out;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    out.push_back(ternarize(params.layers[l].weight.value(), deltas[l].value()(0, 0)).values);
  }
  return out;
}

WeightOverride TernaryNetwork::graph_weights() const {
  WeightOverride out;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    out.push_back(ternary_weight(params.layers[l].weight, deltas[l]));
  }
  return out;
}

void TernaryNetwork::zero_grad() {
  params.zero_grad();
  for (auto& d : deltas) d.zero_grad();
}

MLPParams TernaryNetwork::quantized_params() const {
  std::vector<Eigen::MatrixXd> biases;
  std::vector<Activation> acts;
  for (const auto& l : params.layers) {
    biases.push_back(l.bias.value());
    acts.push_back(l.activation);
  }
  return MLPParams::from_matrices(quantized(), biases, acts);
}

ad::Tensor ternary_forward(const TernaryNetwork& net, const ad::Tensor& input) {
  const WeightOverride w = net.graph_weights();
  return forward(net.params, input, &w);
}

Eigen::MatrixXd ternary_evaluate(const TernaryNetwork& net, const Eigen::MatrixXd& input) {
  return evaluate(net.params, input, net.quantized());
}

void threshold_step(TernaryNetwork& net, double learning_rate) {
  for (std::size_t l = 0; l < net.deltas.size(); ++l) {
    const double max_abs = net.params.layers[l].weight.value().cwiseAbs().maxCoeff();
    double& d = net.deltas[l].mutable_value()(0, 0);
    d = std::clamp(d - learning_rate * net.deltas[l].grad()(0, 0), 0.0, max_abs);
  }
}

void weight_step(TernaryNetwork& net, AdamState& state) { adam_step(net.params, state); }

std::size_t distinct_values(const Eigen::MatrixXd& m) {
  return std::set<double>(m.data(), m.data() + m.size()).size();
}

TernaryGenerator train_stage2_ternary(const GeneratorModel& meta,
                                      const std::pair<CriticModel, CriticModel>& meta_critics,
                                      const DiscreteMeasure& local_data, const TrainConfig& config,
                                      const TernaryConfig& ternary, const TernaryMonitor* monitor) {
  config.validate();
  if (local_data.dim() != meta.data_dim()) {
    throw std::invalid_argument("train_stage2_ternary: local data dimension does not match the meta generator");
  }
  const double threshold_lr =
      ternary.threshold_learning_rate < 0.0 ? config.adam.learning_rate : ternary.threshold_learning_rate;
  Rng rng(config.seed);
  const auto m = static_cast<std::size_t>(config.batch_size);
  const GeneratorModel frozen_meta = meta;
  const std::uint64_t meta_hash = frozen_meta.params.content_hash();

  TernaryGenerator gen{TernaryNetwork(meta.params, ternary.delta_init_fraction), meta.noise};
  TernaryNetwork psi(meta_critics.second.params, ternary.delta_init_fraction);
  TernaryNetwork psi_tilde(meta_critics.first.params, ternary.delta_init_fraction);
  AdamState gen_opt(gen.net.params.parameters(), config.adam);
  AdamState psi_opt(psi.params.parameters(), config.adam);
  AdamState tilde_opt(psi_tilde.params.parameters(), config.adam);

  struct Slot {
    TernaryNetwork* net;
    AdamState* opt;
    double weight;
    bool local;
  };
  std::vector<Slot> slots;
  if (config.stage2_weights.first > 0.0) slots.push_back({&psi, &psi_opt, config.stage2_weights.first, true});
  if (config.stage2_weights.second > 0.0) {
    slots.push_back({&psi_tilde, &tilde_opt, config.stage2_weights.second, false});
  }

  auto real_batch = [&](const Slot& s) {
    return s.local ? sample_measure(local_data, m, rng) : sample_points(frozen_meta, m, rng);
  };
  auto fake_batch = [&] { return ternary_evaluate(gen.net, gen.noise.sample(m, rng)); };
  auto critic_objective = [&](const Slot& s) {
    const WeightOverride w = s.net->graph_weights();
    return critic_loss(s.net->params, real_batch(s), fake_batch(), s.weight, config.gp_coefficient,
                       rng, &w);
  };
  auto generator_objective = [&] {
    const ad::Tensor out = ternary_forward(gen.net, ad::constant(gen.noise.sample(m, rng)));
    ad::Tensor loss = ad::constant(Eigen::MatrixXd::Zero(1, 1));
    for (const auto& s : slots) {
      loss = ad::add(loss, ad::scale(ad::mean(ternary_forward(*s.net, out)), -s.weight));
    }
    return loss;
  };
  auto refresh_all = [&] {
    int degenerate = gen.net.refresh();
    for (const auto& s : slots) degenerate += s.net->refresh();
    return degenerate;
  };

  bool warned = false;
  for (int it = 1; it <= config.generator_iters; ++it) {
    int degenerate = refresh_all();

    // Thresholds: critics, then the generator.
    for (const auto& s : slots) {
      s.net->zero_grad();
      ad::backward(critic_objective(s));
      threshold_step(*s.net, threshold_lr);
    }
    gen.net.zero_grad();
    ad::backward(generator_objective());
    threshold_step(gen.net, threshold_lr);
    degenerate += refresh_all();

    // Full-precision weights through the straight-through path.
    for (int c = 0; c < config.critic_iters; ++c) {
      for (const auto& s : slots) {
        s.net->zero_grad();
        ad::backward(critic_objective(s));
        weight_step(*s.net, *s.opt);
      }
    }
    gen.net.zero_grad();
    ad::backward(generator_objective());
    weight_step(gen.net, gen_opt);
    degenerate += refresh_all();

    if (degenerate > 0 && !warned) {
      warn("ternary training hit a degenerate layer (no weight above threshold) at iteration " + std::to_string(it));
      warned = true;
    }
    if (monitor != nullptr && monitor->callback) monitor->callback(it, gen);
  }
  if (frozen_meta.params.content_hash() != meta_hash) throw StageError("adapt", "frozen meta generator was modified");
  return gen;
}

}  // namespace barycoal
