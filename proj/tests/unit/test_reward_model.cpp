// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "latsearch/reward_model.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace latsearch;

namespace {

std::vector<LatentRewardSample> random_samples(int n, RngStream& rng, const RewardNetShape& shape) {
  std::vector<LatentRewardSample> out;
  for (int i = 0; i < n; ++i) {
    LatentRewardSample s;
    s.z_t = rng.normal_latent(shape.frames, shape.dims);
    s.cond = Condition::prompt(static_cast<int>(rng.below(shape.components)));
    s.t = 1 + static_cast<int>(rng.below(shape.steps - 1));
    s.r_video = {rng.uniform(), rng.uniform(), rng.uniform()};
    s.s_t = rng.uniform();
    s.r_tilde = assign_target(s.r_video, s.s_t);
    out.push_back(s);
  }
  return out;
}

std::vector<const LatentRewardSample*> ptrs(const std::vector<LatentRewardSample>& v) {
  std::vector<const LatentRewardSample*> p;
  for (const auto& s : v) p.push_back(&s);
  return p;
}

}  // namespace

TEST_CASE("RewardNet: parameter count") {
  for (auto [F, D, K, T, E, H] : {std::array{4, 4, 4, 32, 8, 64}, std::array{2, 3, 5, 10, 4, 7}}) {
    const RewardNetShape s{F, D, K, T, E, H};
    const RewardNet net(s);
    CHECK(net.parameter_count() == static_cast<std::size_t>((F * D + K + 1 + E) * H + H + 3 * H + 3 + T * E));
    CHECK(net.flatten().size() == static_cast<Eigen::Index>(net.parameter_count()));
  }
}

TEST_CASE("RewardNet: zero parameters predict zero") {
  const RewardNet net(RewardNetShape{});
  RngStream rng(1, "test.zero");
  for (int t : {0, 5, 32})
    CHECK(net.predict(rng.normal_latent(4, 4), Condition::prompt(1), t) == Eigen::Vector3d::Zero());
}

TEST_CASE("RewardNet: forward pass matches an independent evaluation") {
  RngStream rng(2, "test.forward");
  const RewardNetShape shape{3, 2, 3, 6, 4, 5};
  const RewardNet net = RewardNet::initialized(shape, rng);
  for (int trial = 0; trial < 20; ++trial) {
    const Latent z = rng.normal_latent(3, 2);
    const int k = static_cast<int>(rng.below(4));
    const Condition c = k == 3 ? Condition::null() : Condition::prompt(k);
    const int t = static_cast<int>(rng.below(7));
    std::vector<double> x;
    for (int f = 0; f < 3; ++f)
      for (int d = 0; d < 2; ++d) x.push_back(z(f, d));
    for (int j = 0; j <= 3; ++j) x.push_back(j == (k == 3 ? 3 : k) ? 1.0 : 0.0);
    for (int e = 0; e < 4; ++e) x.push_back(net.embedding(std::min(t, 5), e));
    Eigen::Vector3d expect;
    for (int o = 0; o < 3; ++o) {
      double y = net.b2(o);
      for (int h = 0; h < 5; ++h) {
        double a = net.b1(h);
        for (std::size_t i = 0; i < x.size(); ++i) a += net.w1(h, static_cast<Eigen::Index>(i)) * x[i];
        y += net.w2(o, h) * std::tanh(a);
      }
      expect(o) = y;
    }
    const Eigen::Vector3d got = net.predict(z, c, t);
    CHECK((got - expect).cwiseAbs().maxCoeff() <= 1e-14 * std::max(1.0, expect.cwiseAbs().maxCoeff()));
    CHECK(got == net.predict(z, c, t));
  }
  CHECK_THROWS_AS(net.predict(Latent::Zero(2, 2), Condition::prompt(0), 0), std::invalid_argument);
  CHECK_THROWS_AS(net.predict(Latent::Zero(3, 2), Condition::prompt(0), 7), std::invalid_argument);
}

TEST_CASE("losses: examples") {
  const Eigen::Vector3d p(0.3, 0.2, 0.9);
  CHECK(regression_loss(p, p) == Eigen::Vector3d::Zero());
  CHECK(regression_loss(Eigen::Vector3d(1, 0, 0), Eigen::Vector3d::Zero()) == Eigen::Vector3d(1, 0, 0));
  CHECK(regression_loss(Eigen::Vector3d(0.5, -0.5, 2), Eigen::Vector3d::Zero()) == Eigen::Vector3d(0.25, 0.25, 4));

  CHECK(std::abs(pair_loss(0.0, true) - std::log(2.0)) <= 1e-12);
  CHECK(std::abs(pair_loss(0.0, false) - std::log(2.0)) <= 1e-12);
  CHECK(pair_loss(std::log(3.0), true) == doctest::Approx(0.28768207245178093).epsilon(1e-14));
  CHECK(pair_loss(50.0, true) < 1e-20);
  CHECK(std::isfinite(pair_loss(-1e6, true)));
  CHECK(pair_loss(-1e6, true) == doctest::Approx(1e6));

  LossWeights w;
  w.reg.setZero();
  w.pref.setZero();
  CHECK(total_loss(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(4, 5, 6), w) == 0.0);
  w.reg.setOnes();
  CHECK(total_loss(Eigen::Vector3d(0.1, 0.2, 0.3), Eigen::Vector3d(4, 5, 6), w) == doctest::Approx(0.6));
  const TrainConfig defaults;
  CHECK(defaults.weights.reg == Eigen::Vector3d::Ones());
  CHECK(defaults.weights.pref == Eigen::Vector3d::Ones());
}

TEST_CASE("preference_pairs: counting and ties") {
  std::vector<Eigen::Vector3d> two{{0.1, 0.5, 0.9}, {0.2, 0.4, 0.1}};
  for (const auto& P : preference_pairs(two, 1e-6)) CHECK(P.size() == 2);
  std::vector<Eigen::Vector3d> same(3, Eigen::Vector3d(0.4, 0.4, 0.4));
  for (const auto& P : preference_pairs(same, 1e-6)) CHECK(P.empty());
  std::vector<Eigen::Vector3d> four{{0.1, 0.2, 0.3}, {0.4, 0.5, 0.6}, {0.7, 0.8, 0.9}, {0.0, 0.05, 0.95}};
  for (const auto& P : preference_pairs(four, 1e-6)) CHECK(P.size() == 12);
  std::vector<Eigen::Vector3d> near{{0.1, 0.1, 0.1}, {0.1 + 5e-7, 0.2, 0.1}};
  const auto P = preference_pairs(near, 1e-6);
  CHECK(P[0].empty());
  CHECK(P[1].size() == 2);
  CHECK(P[2].empty());
}

TEST_CASE("preference_loss: pair symmetry and batch permutation invariance") {
  RngStream rng(3, "test.perm");
  std::vector<Eigen::Vector3d> preds, labels;
  for (int i = 0; i < 6; ++i) {
    preds.emplace_back(rng.normal(), rng.normal(), rng.normal());
    labels.emplace_back(rng.uniform(), rng.uniform(), rng.uniform());
  }
  // (i, j) with label 1 and (j, i) with label 0 cost the same.
  const double d = preds[0](0) - preds[1](0);
  CHECK(pair_loss(d, true) == pair_loss(-d, false));
  const Eigen::Vector3d base = preference_loss(preds, labels, preference_pairs(labels, 1e-6));
  std::vector<int> order(6);
  std::iota(order.begin(), order.end(), 0);
  std::reverse(order.begin(), order.end());
  std::swap(order[1], order[4]);
  std::vector<Eigen::Vector3d> p2, l2;
  for (int i : order) {
    p2.push_back(preds[static_cast<std::size_t>(i)]);
    l2.push_back(labels[static_cast<std::size_t>(i)]);
  }
  const Eigen::Vector3d permuted = preference_loss(p2, l2, preference_pairs(l2, 1e-6));
  CHECK((base - permuted).cwiseAbs().maxCoeff() < 1e-14);
  std::vector<Eigen::Vector3d> flat(6, Eigen::Vector3d::Constant(0.5));
  CHECK(preference_loss(preds, flat, preference_pairs(flat, 1e-6)) == Eigen::Vector3d::Zero());
}

TEST_CASE("backward: stationary point and unused embedding rows") {
  RngStream rng(4, "test.backward");
  const RewardNetShape shape;
  const RewardNet net = RewardNet::initialized(shape, rng);
  const Latent z = rng.normal_latent(4, 4);
  TrainConfig cfg;
  cfg.weights.pref.setZero();
  Example e{&z, Condition::prompt(2), 7, net.predict(z, Condition::prompt(2), 7), {}};
  e.label = e.target;
  const std::vector<Example> one{e};
  CHECK(backward(net, one, cfg).grad.flatten().cwiseAbs().maxCoeff() == 0.0);

  cfg.weights.pref.setOnes();
  std::vector<Latent> zs{rng.normal_latent(4, 4), rng.normal_latent(4, 4), rng.normal_latent(4, 4)};
  std::vector<Example> batch;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector3d tgt(rng.uniform(), rng.uniform(), rng.uniform());
    batch.push_back({&zs[static_cast<std::size_t>(i)], Condition::prompt(i), 3 + 5 * i, tgt, tgt});
  }
  const RewardNet g = backward(net, batch, cfg).grad;
  for (int row = 0; row < shape.steps; ++row) {
    const bool used = row == 3 || row == 8 || row == 13;
    CHECK((g.embedding.row(row).cwiseAbs().maxCoeff() == 0.0) == !used);
  }
}

TEST_CASE("backward: matches central differences") {
  RngStream rng(5, "test.fd");
  const RewardNetShape shape{2, 2, 2, 5, 3, 6};
  RewardNet net = RewardNet::initialized(shape, rng);
  std::vector<Latent> zs;
  for (int i = 0; i < 4; ++i) zs.push_back(rng.normal_latent(2, 2));
  std::vector<Example> batch;
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector3d tgt(rng.uniform(), rng.uniform(), rng.uniform());
    batch.push_back({&zs[static_cast<std::size_t>(i)], i == 3 ? Condition::null() : Condition::prompt(i % 2), i + 1, tgt, tgt});
  }
  TrainConfig cfg;
  const Eigen::VectorXd a = backward(net, batch, cfg).grad.flatten();
  const Eigen::VectorXd theta = net.flatten();
  const double h = 1e-6, floor = 1e-3 * a.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Eigen::VectorXd tp = theta, tm = theta;
    tp(i) += h;
    tm(i) -= h;
    net.assign(tp);
    const double lp = batch_loss(net, batch, cfg).total;
    net.assign(tm);
    const double lm = batch_loss(net, batch, cfg).total;
    const double n = (lp - lm) / (2 * h);
    CHECK(std::abs(a(i) - n) / std::max({std::abs(a(i)), std::abs(n), floor}) < 1e-5);
  }
}

TEST_CASE("train: zero learning rate leaves parameters untouched") {
  RngStream rng(6, "test.lr0");
  const RewardNetShape shape;
  const auto data = random_samples(20, rng, shape);
  const RewardNet net = RewardNet::initialized(shape, rng);
  TrainConfig cfg;
  cfg.lr = 0.0;
  cfg.epochs = 3;
  const auto p = ptrs(data);
  CHECK((train(net, p, cfg).net.flatten().array() == net.flatten().array()).all());
}

TEST_CASE("train: memorizes a single sample") {
  RngStream rng(7, "test.memorize");
  const RewardNetShape shape;
  const auto data = random_samples(1, rng, shape);
  TrainConfig cfg;
  cfg.weights.pref.setZero();
  cfg.lr = 0.05;
  cfg.epochs = 400;
  cfg.lr_drop_epoch = 400;
  const auto p = ptrs(data);
  const TrainResult r = train(RewardNet::initialized(shape, rng), p, cfg);
  const auto ex = make_examples(p, cfg.labels);
  CHECK(dataset_loss(r.net, ex, cfg).total < 1e-6);
}

TEST_CASE("train: deterministic and monotone on a fixed batch") {
  RngStream rng(8, "test.monotone");
  const RewardNetShape shape;
  const auto data = random_samples(8, rng, shape);
  const RewardNet net = RewardNet::initialized(shape, rng);
  const auto p = ptrs(data);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.seed = 4;
  CHECK((train(net, p, cfg).net.flatten().array() == train(net, p, cfg).net.flatten().array()).all());

  cfg.weights.pref.setZero();
  cfg.momentum = 0.0;
  cfg.lr = 1e-3;
  cfg.batch_size = 8;
  cfg.epochs = 50;
  const TrainResult r = train(net, p, cfg);
  REQUIRE(r.log.size() == 51);
  for (std::size_t e = 2; e < r.log.size(); ++e) CHECK(r.log[e].loss.total <= r.log[e - 1].loss.total);
  CHECK(r.log[1].lr == 1e-3);
}

TEST_CASE("train: learning rate drop and divergence") {
  TrainConfig cfg;
  cfg.lr = 0.1;
  cfg.lr_drop_epoch = 3;
  cfg.lr_drop_factor = 0.1;
  CHECK(cfg.learning_rate(2) == 0.1);
  CHECK(cfg.learning_rate(3) == doctest::Approx(0.01));
  cfg.batch_size = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  RngStream rng(9, "test.diverge");
  const RewardNetShape shape;
  const auto data = random_samples(32, rng, shape);
  TrainConfig bad;
  bad.lr = 1e300;
  bad.epochs = 5;
  const auto p = ptrs(data);
  CHECK_THROWS_AS(train(RewardNet::initialized(shape, rng), p, bad), TrainingDiverged);
}

TEST_CASE("eval_preference_accuracy: perfect and constant predictors") {
  RngStream rng(10, "test.acc");
  const RewardNetShape shape;
  auto data = random_samples(400, rng, shape);
  for (std::size_t i = 0; i < data.size(); ++i) data[i].t = i % 2 ? 20 : 10;
  const auto p = ptrs(data);
  const std::vector<int> ts{10, 20, 30};
  RngStream ties(1, "ties");
  const auto perfect = eval_preference_accuracy(
      [](const LatentRewardSample& s) { return s.r_tilde.as_vector(); }, p, ts, 1e-6, ties);
  for (const auto& c : perfect) {
    if (c.t == 30) {
      CHECK_FALSE(c.accuracy.has_value());
      CHECK(c.pairs == 0);
    } else {
      CHECK(*c.accuracy == 1.0);
      CHECK(c.pairs == 200 * 199);
    }
  }
  const auto constant = eval_preference_accuracy(
      [](const LatentRewardSample&) { return Eigen::Vector3d(0.5, 0.5, 0.5); }, p, ts, 1e-6, ties);
  for (const auto& c : constant) {
    if (!c.accuracy) continue;
    const double sigma = std::sqrt(0.25 / (static_cast<double>(c.pairs) / 2));  // both orderings share a coin
    CHECK(std::abs(*c.accuracy - 0.5) <= 3 * sigma);
  }
}

TEST_CASE("checkpoint round trip") {
  RngStream rng(11, "test.ckpt");
  const RewardNetShape shape;
  const RewardNet net = RewardNet::initialized(shape, rng);
  const std::string bytes = encode_tensors(to_checkpoint(net, {{"config_hash", "abc"}, {"tool_version", "t"}}));
  const RewardNet back = from_checkpoint(decode_tensors(bytes));
  CHECK(back.shape() == shape);
  for (int i = 0; i < 100; ++i) {
    const Latent z = rng.normal_latent(4, 4);
    const int t = static_cast<int>(rng.below(33));
    CHECK(back.predict(z, Condition::prompt(i % 4), t) == net.predict(z, Condition::prompt(i % 4), t));
  }
}
