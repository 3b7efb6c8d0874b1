// Copyright 2026 The barycoal Authors
// SPDX-License-Identifier: Apache-2.0

#include "barycoal/adversarial.hpp"

#include "barycoal/error.hpp"

#include <stdexcept>

namespace barycoal {

Eigen::MatrixXd NoisePrior::sample(std::size_t n, Rng& rng) const {
  if (dim < 1) throw std::invalid_argument("NoisePrior: dim must be >= 1");
  Eigen::MatrixXd z(static_cast<Eigen::Index>(n), dim);
  if (kind == NoiseKind::Gaussian) {
    std::normal_distribution<double> g(0.0, 1.0);
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = g(rng);
  } else {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = u(rng);
  }
  return z;
}

GeneratorModel make_generator(std::size_t data_dim, const Architecture& arch, Rng& rng) {
  if (data_dim == 0) throw std::invalid_argument("make_generator: data_dim must be positive");
  std::vector<int> sizes{arch.noise_dim};
  std::vector<Activation> acts;
  for (int l = 0; l < arch.hidden_layers; ++l) {
    sizes.push_back(arch.hidden_width);
    acts.push_back(Activation::ReLU);
  }
  sizes.push_back(static_cast<int>(data_dim));
  acts.push_back(data_dim >= 2 ? Activation::Tanh : Activation::Identity);
  return {MLPParams::init(sizes, acts, rng), NoisePrior{arch.noise, arch.noise_dim}};
}

CriticModel make_critic(std::size_t data_dim, const Architecture& arch, Rng& rng) {
  if (data_dim == 0) throw std::invalid_argument("make_critic: data_dim must be positive");
  std::vector<int> sizes{static_cast<int>(data_dim)};
  std::vector<Activation> acts;
  for (int l = 0; l < arch.hidden_layers; ++l) {
    sizes.push_back(arch.hidden_width);
    acts.push_back(Activation::LeakyReLU);
  }
  sizes.push_back(1);
  acts.push_back(Activation::Identity);
  return {MLPParams::init(sizes, acts, rng)};
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (generator_iters < 0) throw std::invalid_argument("TrainConfig: generator_iters must be >= 0");
  if (critic_iters < 1) throw std::invalid_argument("TrainConfig: critic_iters must be >= 1");
  if (!(adam.learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning rate must be positive");
  if (gp_coefficient < 0.0) throw std::invalid_argument("TrainConfig: gp_coefficient must be >= 0");
  for (const auto& [a, b] : stage1_weights) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("TrainConfig: stage1 weights must be positive");
  }
  if (stage2_weights.first < 0.0 || stage2_weights.second < 0.0 ||
      stage2_weights.first + stage2_weights.second <= 0.0) {
    throw std::invalid_argument("TrainConfig: stage2 weights must be >= 0 and not both zero");
  }
}

void TrainingMonitor::notify(int iteration, int total, const GeneratorModel& g) const {
  if (!callback) return;
  if (iteration == 0 || iteration == total || (every > 0 && iteration % every == 0)) callback(iteration, g);
}

Eigen::MatrixXd sample_points(const GeneratorModel& g, std::size_t n, Rng& rng) {
  return evaluate(g.params, g.noise.sample(n, rng));
}

DiscreteMeasure sample_generator(const GeneratorModel& g, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample_generator: n must be >= 1");
  Rng rng(seed);
  return DiscreteMeasure::from_rows(sample_points(g, n, rng));
}

Eigen::MatrixXd sample_measure(const DiscreteMeasure& m, std::size_t n, Rng& rng) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m.dim()));
  const bool uniform = m.is_uniform();
  std::uniform_int_distribution<std::size_t> pick_uniform(0, m.size() - 1);
  std::discrete_distribution<std::size_t> pick_weighted(m.weights().begin(), m.weights().end());
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t i = uniform ? pick_uniform(rng) : pick_weighted(rng);
    for (std::size_t k = 0; k < m.dim(); ++k) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = m.point(i)[k];
  }
  return out;
}

ad::Tensor critic_loss(const CriticModel& critic, const Eigen::MatrixXd& real, const Eigen::MatrixXd& fake,
                       double weight, double gp_coefficient, Rng& rng, const WeightOverride* weights) {
  return critic_loss(critic.params, real, fake, weight, gp_coefficient, rng, weights);
}

ad::Tensor critic_loss(const MLPParams& critic, const Eigen::MatrixXd& real, const Eigen::MatrixXd& fake,
                       double weight, double gp_coefficient, Rng& rng, const WeightOverride* weights) {
  if (real.rows() != fake.rows() || real.cols() != fake.cols()) {
    throw std::invalid_argument("critic_loss: real and fake batches differ in shape");
  }
  const ad::Tensor on_real = ad::mean(forward(critic, ad::constant(real), weights));
  const ad::Tensor on_fake = ad::mean(forward(critic, ad::constant(fake), weights));
  const ad::Tensor w_term = ad::scale(ad::sub(on_real, on_fake), -weight);
  return ad::add(w_term, gradient_penalty(critic, real, fake, gp_coefficient, rng, weights));
}

ad::Tensor generator_loss_two_critics(const ad::Tensor& gen_out, const CriticModel& critic_a,
                                      const CriticModel& critic_b, double lambda_a, double lambda_b) {
  const ad::Tensor a = ad::scale(ad::mean(forward(critic_a.params, gen_out)), lambda_a);
  const ad::Tensor b = ad::scale(ad::mean(forward(critic_b.params, gen_out)), lambda_b);
  return ad::scale(ad::add(a, b), -1.0);
}

ad::Tensor generator_loss(const ad::Tensor& gen_out, const CriticModel& critic) {
  return ad::scale(ad::mean(forward(critic.params, gen_out)), -1.0);
}

std::vector<int> mixing_counts(int m, int sources) {
  if (m < 1 || sources < 1) throw std::invalid_argument("mixing_counts: need m >= 1 and sources >= 1");
  std::vector<int> out(static_cast<std::size_t>(sources), m / sources);
  for (int i = 0; i < m % sources; ++i) ++out[static_cast<std::size_t>(i)];
  return out;
}

std::uint64_t derive_seed(std::uint64_t base, const std::string& tag) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::uint64_t z = base ^ h;
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

using RealSource = std::function<Eigen::MatrixXd(std::size_t, Rng&)>;

struct CriticSlot {
  CriticModel* critic;
  double weight;
  RealSource real;
  AdamState opt;
};

RealSource from_measure(const DiscreteMeasure& m) {
  return [&m](std::size_t n, Rng& rng) { return sample_measure(m, n, rng); };
}

RealSource from_generator(const GeneratorModel& g) {
  return [&g](std::size_t n, Rng& rng) { return sample_points(g, n, rng); };
}

// The shared WGAN-GP loop: critic_iters critic steps per slot, then one
// generator step against the weighted sum of all critics.
void run_wgan(GeneratorModel& g, std::vector<CriticSlot>& slots, const TrainConfig& cfg, Rng& rng,
              const TrainingMonitor* monitor) {
  const auto m = static_cast<std::size_t>(cfg.batch_size);
  AdamState g_opt(g.params.parameters(), cfg.adam);
  if (monitor != nullptr) monitor->notify(0, cfg.generator_iters, g);
  for (int it = 1; it <= cfg.generator_iters; ++it) {
    for (int c = 0; c < cfg.critic_iters; ++c) {
      for (auto& slot : slots) {
        const Eigen::MatrixXd fake = sample_points(g, m, rng);
        const Eigen::MatrixXd real = slot.real(m, rng);
        slot.critic->params.zero_grad();
        ad::backward(critic_loss(*slot.critic, real, fake, slot.weight, cfg.gp_coefficient, rng));
        adam_step(slot.critic->params, slot.opt);
      }
    }
    const ad::Tensor out = forward(g.params, ad::constant(g.noise.sample(m, rng)));
    ad::Tensor loss = ad::constant(Eigen::MatrixXd::Zero(1, 1));
    for (const auto& slot : slots) {
      loss = ad::add(loss, ad::scale(generator_loss(out, *slot.critic), slot.weight));
    }
    g.params.zero_grad();
    ad::backward(loss);
    adam_step(g.params, g_opt);
    if (monitor != nullptr) monitor->notify(it, cfg.generator_iters, g);
  }
}

void require_dataset(const DiscreteMeasure& d, std::size_t dim, const char* what) {
  if (d.dim() != dim) {
    throw std::invalid_argument(std::string(what) + ": data dimension " + std::to_string(d.dim()) +
                                " does not match model dimension " + std::to_string(dim));
  }
}

void require_unchanged(const GeneratorModel& frozen, std::uint64_t hash, const char* stage) {
  if (frozen.params.content_hash() != hash) throw StageError(stage, "frozen generator was modified");
}

}  // namespace

TrainedPair train_pretrained(const DiscreteMeasure& dataset, const TrainConfig& config, const Architecture& arch,
                             const TrainingMonitor* monitor) {
  config.validate();
  Rng rng(config.seed);
  TrainedPair out{make_generator(dataset.dim(), arch, rng), make_critic(dataset.dim(), arch, rng)};
  std::vector<CriticSlot> slots;
  slots.push_back({&out.critic, 1.0, from_measure(dataset), AdamState(out.critic.params.parameters(), config.adam)});
  run_wgan(out.generator, slots, config, rng, monitor);
  return out;
}

Stage1Result train_stage1(const std::vector<TrainedPair>& pretrained, const TrainConfig& config,
                          const TrainingMonitor* monitor) {
  config.validate();
  if (pretrained.size() < 2) throw std::invalid_argument("train_stage1: need at least two pretrained models");
  const std::size_t dim = pretrained.front().generator.data_dim();
  for (const auto& p : pretrained) {
    if (p.generator.data_dim() != dim || p.critic.params.input_dim() != dim) {
      throw std::invalid_argument("train_stage1: pretrained models disagree on data dimension");
    }
  }
  Rng rng(config.seed);
  Stage1Result star{pretrained[0].generator, pretrained[0].critic, pretrained[0].critic};
  for (std::size_t k = 1; k < pretrained.size(); ++k) {
    const auto [lambda_psi, lambda_tilde] =
        k - 1 < config.stage1_weights.size() ? config.stage1_weights[k - 1] : std::pair{1.0, 1.0};
    const GeneratorModel frozen_prev = star.generator;
    const GeneratorModel& frozen_node = pretrained[k].generator;
    const std::uint64_t prev_hash = frozen_prev.params.content_hash();
    const std::uint64_t node_hash = frozen_node.params.content_hash();

    GeneratorModel g = star.generator;
    CriticModel psi = pretrained[k].critic;
    CriticModel psi_tilde = config.inheritance == CriticInheritance::PreviousPsi ? star.psi : star.psi_tilde;
    std::vector<CriticSlot> slots;
    slots.push_back({&psi, lambda_psi, from_generator(frozen_node), AdamState(psi.params.parameters(), config.adam)});
    slots.push_back({&psi_tilde, lambda_tilde, from_generator(frozen_prev),
                     AdamState(psi_tilde.params.parameters(), config.adam)});
    run_wgan(g, slots, config, rng, monitor);

    require_unchanged(frozen_prev, prev_hash, "coalesce");
    require_unchanged(frozen_node, node_hash, "coalesce");
    star = Stage1Result{std::move(g), std::move(psi), std::move(psi_tilde)};
  }
  return star;
}

GeneratorModel train_one_shot(const std::vector<TrainedPair>& pretrained, const std::vector<double>& weights,
                              const TrainConfig& config, const TrainingMonitor* monitor) {
  config.validate();
  if (pretrained.size() < 2) throw std::invalid_argument("train_one_shot: need at least two pretrained models");
  if (weights.size() != pretrained.size()) throw std::invalid_argument("train_one_shot: one weight per model");
  const std::size_t dim = pretrained.front().generator.data_dim();
  std::vector<std::uint64_t> hashes;
  for (std::size_t k = 0; k < pretrained.size(); ++k) {
    if (pretrained[k].generator.data_dim() != dim || pretrained[k].critic.params.input_dim() != dim) {
      throw std::invalid_argument("train_one_shot: pretrained models disagree on data dimension");
    }
    if (!(weights[k] > 0.0)) throw std::invalid_argument("train_one_shot: weights must be positive");
    hashes.push_back(pretrained[k].generator.params.content_hash());
  }
  Rng rng(config.seed);
  GeneratorModel g = pretrained[0].generator;
  std::vector<CriticModel> critics;
  for (const auto& p : pretrained) critics.push_back(p.critic);
  std::vector<CriticSlot> slots;
  for (std::size_t k = pretrained.size(); k-- > 0;) {
    slots.push_back({&critics[k], weights[k], from_generator(pretrained[k].generator),
                     AdamState(critics[k].params.parameters(), config.adam)});
  }
  run_wgan(g, slots, config, rng, monitor);
  for (std::size_t k = 0; k < pretrained.size(); ++k) require_unchanged(pretrained[k].generator, hashes[k], "one-shot");
  return g;
}

GeneratorModel train_stage2(const GeneratorModel& meta, const std::pair<CriticModel, CriticModel>& meta_critics,
                            const DiscreteMeasure& local_data, const TrainConfig& config,
                            const TrainingMonitor* monitor) {
  config.validate();
  require_dataset(local_data, meta.data_dim(), "train_stage2");
  Rng rng(config.seed);
  const GeneratorModel frozen_meta = meta;
  const std::uint64_t meta_hash = frozen_meta.params.content_hash();
  GeneratorModel g = meta;
  CriticModel psi_tilde = meta_critics.first;
  CriticModel psi = meta_critics.second;
  const auto [lambda_local, lambda_meta] = config.stage2_weights;
  std::vector<CriticSlot> slots;
  if (lambda_local > 0.0) {
    slots.push_back({&psi, lambda_local, from_measure(local_data), AdamState(psi.params.parameters(), config.adam)});
  }
  if (lambda_meta > 0.0) {
    slots.push_back({&psi_tilde, lambda_meta, from_generator(frozen_meta),
                     AdamState(psi_tilde.params.parameters(), config.adam)});
  }
  run_wgan(g, slots, config, rng, monitor);
  require_unchanged(frozen_meta, meta_hash, "adapt");
  return g;
}

GeneratorModel baseline_edge_only(const DiscreteMeasure& local_data, const TrainConfig& config,
                                  const Architecture& arch, const TrainingMonitor* monitor) {
  return train_pretrained(local_data, config, arch, monitor).generator;
}

GeneratorModel baseline_transfer(const TrainedPair& pretrained, const DiscreteMeasure& local_data,
                                 const TrainConfig& config, const TrainingMonitor* monitor) {
  config.validate();
  require_dataset(local_data, pretrained.generator.data_dim(), "baseline_transfer");
  Rng rng(config.seed);
  GeneratorModel g = pretrained.generator;
  CriticModel critic = pretrained.critic;
  std::vector<CriticSlot> slots;
  slots.push_back({&critic, 1.0, from_measure(local_data), AdamState(critic.params.parameters(), config.adam)});
  run_wgan(g, slots, config, rng, monitor);
  return g;
}

GeneratorModel baseline_ensemble(const std::vector<TrainedPair>& pretrained, const DiscreteMeasure* local_data,
                                 const TrainConfig& config, const TrainingMonitor* monitor) {
  config.validate();
  if (pretrained.empty()) throw std::invalid_argument("baseline_ensemble: no pretrained models");
  const std::size_t dim = pretrained.front().generator.data_dim();
  if (local_data != nullptr) require_dataset(*local_data, dim, "baseline_ensemble");
  Rng rng(config.seed);
  std::vector<GeneratorModel> frozen;
  for (const auto& p : pretrained) {
    if (p.generator.data_dim() != dim) throw std::invalid_argument("baseline_ensemble: dimension mismatch");
    frozen.push_back(p.generator);
  }
  const int sources = static_cast<int>(frozen.size()) + (local_data != nullptr ? 1 : 0);
  const std::vector<int> counts = mixing_counts(config.batch_size, sources);

  RealSource mixed = [&frozen, local_data, counts, dim](std::size_t n, Rng& r) {
    Eigen::MatrixXd batch(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    const std::vector<int> split = mixing_counts(static_cast<int>(n), static_cast<int>(counts.size()));
    Eigen::Index row = 0;
    std::size_t s = 0;
    if (local_data != nullptr) {
      batch.middleRows(row, split[s]) = sample_measure(*local_data, static_cast<std::size_t>(split[s]), r);
      row += split[s++];
    }
    for (const auto& g : frozen) {
      batch.middleRows(row, split[s]) = sample_points(g, static_cast<std::size_t>(split[s]), r);
      row += split[s++];
    }
    return batch;
  };

  GeneratorModel g = pretrained.front().generator;
  CriticModel critic = pretrained.front().critic;
  std::vector<CriticSlot> slots;
  slots.push_back({&critic, 1.0, mixed, AdamState(critic.params.parameters(), config.adam)});
  run_wgan(g, slots, config, rng, monitor);
  return g;
}

}  // namespace barycoal
