// Copyright 2026 The barycoal Authors
// SPDX-License-Identifier: Apache-2.0

#include "barycoal/adversarial.hpp"
#include "barycoal/error.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace barycoal;

namespace {

Architecture small_arch() {
  Architecture a;
  a.noise_dim = 3;
  a.hidden_width = 8;
  a.hidden_layers = 2;
  return a;
}

TrainConfig small_config(int iters, std::uint64_t seed) {
  TrainConfig c;
  c.generator_iters = iters;
  c.critic_iters = 2;
  c.batch_size = 16;
  c.adam.learning_rate = 1e-3;
  c.seed = seed;
  return c;
}

TrainedPair random_pair(std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  return {make_generator(dim, small_arch(), rng), make_critic(dim, small_arch(), rng)};
}

DiscreteMeasure blob(double cx, double cy, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 0.05);
  std::vector<double> pts;
  for (std::size_t i = 0; i < n; ++i) {
    pts.push_back(cx + g(rng));
    pts.push_back(cy + g(rng));
  }
  return DiscreteMeasure::uniform(std::move(pts), 2);
}

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

}  // namespace

TEST_CASE("architecture") {
  Rng rng(1);
  const GeneratorModel g2 = make_generator(2, small_arch(), rng);
  CHECK(g2.params.input_dim() == 3);
  CHECK(g2.data_dim() == 2);
  CHECK(g2.params.layers.back().activation == Activation::Tanh);
  CHECK(make_generator(1, small_arch(), rng).params.layers.back().activation == Activation::Identity);
  const CriticModel c = make_critic(2, small_arch(), rng);
  CHECK(c.params.output_dim() == 1);
  CHECK(c.params.layers.front().activation == Activation::LeakyReLU);
  CHECK_THROWS_AS(make_generator(0, small_arch(), rng), std::invalid_argument);
}

TEST_CASE("noise priors") {
  Rng rng(2);
  const Eigen::MatrixXd u = NoisePrior{NoiseKind::Uniform, 4}.sample(2000, rng);
  CHECK(u.rows() == 2000);
  CHECK(u.cols() == 4);
  CHECK(u.cwiseAbs().maxCoeff() <= 1.0);
  const Eigen::MatrixXd g = NoisePrior{NoiseKind::Gaussian, 2}.sample(20000, rng);
  CHECK(std::abs(g.mean()) < 0.02);
  CHECK(std::abs((g.array() * g.array()).mean() - 1.0) < 0.03);
}

TEST_CASE("critic_loss without penalty is the negated weighted mean gap") {
  Rng rng(3);
  const CriticModel c = make_critic(2, small_arch(), rng);
  const Eigen::MatrixXd real = random_matrix(rng, 10, 2);
  const Eigen::MatrixXd fake = random_matrix(rng, 10, 2);
  const double gap = evaluate(c.params, real).mean() - evaluate(c.params, fake).mean();
  CHECK(critic_loss(c, real, fake, 2.5, 0.0, rng).item() == doctest::Approx(-2.5 * gap).epsilon(1e-12));
  CHECK(critic_loss(c, real, fake, 1.0, 10.0, rng).item() >= -gap - 1e-12);
  CHECK_THROWS_AS(critic_loss(c, real, random_matrix(rng, 9, 2), 1.0, 0.0, rng), std::invalid_argument);
}

TEST_CASE("two-critic generator loss with a zero weight equals the single-critic loss") {
  Rng rng(4);
  const CriticModel a = make_critic(2, small_arch(), rng);
  const CriticModel b = make_critic(2, small_arch(), rng);
  const ad::Tensor out = ad::constant(random_matrix(rng, 12, 2));
  CHECK(generator_loss_two_critics(out, a, b, 1.0, 0.0).item() == generator_loss(out, a).item());
  const double two = generator_loss_two_critics(out, a, b, 0.3, 0.7).item();
  CHECK(two == doctest::Approx(-(0.3 * evaluate(a.params, out.value()).mean() +
                                 0.7 * evaluate(b.params, out.value()).mean())));
}

TEST_CASE("mixing_counts") {
  CHECK(mixing_counts(64, 3) == std::vector<int>{22, 21, 21});
  CHECK(mixing_counts(64, 1) == std::vector<int>{64});
  CHECK(mixing_counts(5, 5) == std::vector<int>{1, 1, 1, 1, 1});
  for (int m = 1; m < 80; ++m) {
    for (int s = 1; s <= 6; ++s) {
      const auto c = mixing_counts(m, s);
      int total = 0;
      for (int x : c) {
        total += x;
        CHECK(x >= m / s);
        CHECK(x <= (m + s - 1) / s);
      }
      CHECK(total == m);
    }
  }
  CHECK_THROWS_AS(mixing_counts(0, 2), std::invalid_argument);
}

TEST_CASE("TrainConfig validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.critic_iters = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.stage2_weights = {0.0, 0.0};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.stage1_weights = {{1.0, -1.0}};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("zero iterations return the initialization") {
  const TrainedPair p1 = random_pair(2, 10);
  const TrainedPair p2 = random_pair(2, 11);
  const DiscreteMeasure local = blob(0.2, 0.2, 30, 1);
  const TrainConfig cfg = small_config(0, 5);

  const Stage1Result s1 = train_stage1({p1, p2}, cfg);
  CHECK(s1.generator.params.content_hash() == p1.generator.params.content_hash());
  CHECK(s1.psi.params.content_hash() == p2.critic.params.content_hash());
  CHECK(s1.psi_tilde.params.content_hash() == p1.critic.params.content_hash());

  const GeneratorModel s2 = train_stage2(p1.generator, {p1.critic, p2.critic}, local, cfg);
  CHECK(s2.params.content_hash() == p1.generator.params.content_hash());
  CHECK(baseline_transfer(p1, local, cfg).params.content_hash() == p1.generator.params.content_hash());
  CHECK(baseline_ensemble({p2, p1}, &local, cfg).params.content_hash() == p2.generator.params.content_hash());

  Rng rng(cfg.seed);
  const GeneratorModel fresh = make_generator(2, small_arch(), rng);
  CHECK(train_pretrained(local, cfg, small_arch()).generator.params.content_hash() == fresh.params.content_hash());
}

TEST_CASE("training is reproducible per seed and leaves frozen inputs untouched") {
  const TrainedPair p1 = random_pair(2, 20);
  const TrainedPair p2 = random_pair(2, 21);
  const std::uint64_t h1 = p1.generator.params.content_hash();
  const std::uint64_t h2 = p2.generator.params.content_hash();
  const DiscreteMeasure local = blob(0.3, -0.1, 40, 2);
  const TrainConfig cfg = small_config(6, 7);

  const auto run_all = [&] {
    std::vector<std::uint64_t> out;
    out.push_back(train_pretrained(local, cfg, small_arch()).generator.params.content_hash());
    const Stage1Result s1 = train_stage1({p1, p2}, cfg);
    out.push_back(s1.generator.params.content_hash());
    out.push_back(train_stage2(s1.generator, {s1.psi_tilde, s1.psi}, local, cfg).params.content_hash());
    out.push_back(baseline_edge_only(local, cfg, small_arch()).params.content_hash());
    out.push_back(baseline_transfer(p1, local, cfg).params.content_hash());
    out.push_back(baseline_ensemble({p1, p2}, &local, cfg).params.content_hash());
    return out;
  };
  const auto a = run_all();
  const auto b = run_all();
  CHECK(a == b);
  CHECK(a[1] != h1);
  CHECK(p1.generator.params.content_hash() == h1);
  CHECK(p2.generator.params.content_hash() == h2);

  TrainConfig other = cfg;
  other.seed = 8;
  CHECK(train_stage1({p1, p2}, other).generator.params.content_hash() != a[1]);
}

TEST_CASE("stage2 without the replay critic is the transfer baseline") {
  const TrainedPair p = random_pair(2, 30);
  const TrainedPair q = random_pair(2, 31);
  const DiscreteMeasure local = blob(-0.2, 0.1, 40, 3);
  TrainConfig cfg = small_config(5, 9);
  cfg.stage2_weights = {1.0, 0.0};
  const GeneratorModel a = train_stage2(p.generator, {q.critic, p.critic}, local, cfg);
  const GeneratorModel b = baseline_transfer(p, local, cfg);
  CHECK(a.params.content_hash() == b.params.content_hash());
}

TEST_CASE("monitor schedule") {
  const DiscreteMeasure local = blob(0.0, 0.0, 20, 4);
  TrainConfig cfg = small_config(7, 1);
  std::vector<int> seen;
  TrainingMonitor mon;
  mon.every = 3;
  mon.callback = [&](int it, const GeneratorModel&) { seen.push_back(it); };
  train_pretrained(local, cfg, small_arch(), &mon);
  CHECK(seen == std::vector<int>{0, 3, 6, 7});
}

TEST_CASE("input validation") {
  const TrainedPair p2d = random_pair(2, 40);
  const TrainedPair p1d = random_pair(1, 41);
  const DiscreteMeasure local = blob(0.0, 0.0, 10, 5);
  const TrainConfig cfg = small_config(1, 1);
  CHECK_THROWS_AS(train_stage1({p2d}, cfg), std::invalid_argument);
  CHECK_THROWS_AS(train_stage1({p2d, p1d}, cfg), std::invalid_argument);
  CHECK_THROWS_AS(train_stage2(p1d.generator, {p1d.critic, p1d.critic}, local, cfg), std::invalid_argument);
  CHECK_THROWS_AS(baseline_transfer(p1d, local, cfg), std::invalid_argument);
  CHECK_THROWS_AS(baseline_ensemble({}, &local, cfg), std::invalid_argument);
  CHECK_THROWS_AS(baseline_ensemble({p2d, p1d}, &local, cfg), std::invalid_argument);
  CHECK_THROWS_AS(sample_generator(p2d.generator, 0, 1), std::invalid_argument);
}

TEST_CASE("sample_measure respects weights") {
  const DiscreteMeasure m({0.0, 1.0}, 1, {0.25, 0.75});
  Rng rng(6);
  const Eigen::MatrixXd s = sample_measure(m, 20000, rng);
  CHECK(s.mean() == doctest::Approx(0.75).epsilon(0.02));
}

TEST_CASE("derive_seed") {
  CHECK(derive_seed(1, "pretrain/0") == derive_seed(1, "pretrain/0"));
  CHECK(derive_seed(1, "pretrain/0") != derive_seed(1, "pretrain/1"));
  CHECK(derive_seed(1, "pretrain/0") != derive_seed(2, "pretrain/0"));
}

TEST_CASE("one-shot training with two models is Stage I") {
  const TrainedPair p1 = random_pair(2, 50);
  const TrainedPair p2 = random_pair(2, 51);
  TrainConfig cfg = small_config(5, 12);
  cfg.stage1_weights = {{0.7, 1.3}};
  const Stage1Result s1 = train_stage1({p1, p2}, cfg);
  const GeneratorModel one = train_one_shot({p1, p2}, {1.3, 0.7}, cfg);
  CHECK(one.params.content_hash() == s1.generator.params.content_hash());

  const TrainedPair p3 = random_pair(2, 52);
  CHECK(train_one_shot({p1, p2, p3}, {1, 1, 1}, cfg).params.content_hash() !=
        train_stage1({p1, p2, p3}, cfg).generator.params.content_hash());
  CHECK_THROWS_AS(train_one_shot({p1}, {1.0}, cfg), std::invalid_argument);
  CHECK_THROWS_AS(train_one_shot({p1, p2}, {1.0}, cfg), std::invalid_argument);
  CHECK_THROWS_AS(train_one_shot({p1, p2}, {1.0, 0.0}, cfg), std::invalid_argument);
}
