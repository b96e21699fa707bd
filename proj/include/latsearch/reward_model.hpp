// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "latsearch/dataset.hpp"
#include "latsearch/rng.hpp"
#include "latsearch/tensor_io.hpp"

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace latsearch {

struct RewardNetShape {
  int frames = 4;
  int dims = 4;
  int components = 4;
  int steps = 32;
  int embed = 8;
  int hidden = 64;

  int latent_width() const { return frames * dims; }
  // [flatten(z_t) | one-hot(cond, K + 1) | step embedding]
  int input_width() const { return latent_width() + components + 1 + embed; }
  std::size_t parameter_count() const;
  void validate() const;
  friend bool operator==(const RewardNetShape&, const RewardNetShape&) = default;
};

// R(z_t, cond, t) -> (VQ, MQ, TA): one tanh hidden layer over the concatenated input,
// linear 3-way head, and a learned lookup embedding per timestep. The same type doubles
// as the gradient container.
class RewardNet {
 public:
  explicit RewardNet(const RewardNetShape& shape);  // all parameters zero
  static RewardNet initialized(const RewardNetShape& shape, RngStream& rng);

  const RewardNetShape& shape() const { return shape_; }
  std::size_t parameter_count() const;

  // Embedding rows cover t = 0..T-1; t = T shares the last row.
  int embedding_row(int t) const;
  Eigen::VectorXd input(const Latent& z, const Condition& cond, int t) const;
  // Raw (unclamped) scores.
  Eigen::Vector3d predict(const Latent& z, const Condition& cond, int t) const;

  Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& params);

  Eigen::MatrixXd w1;         // hidden x input
  Eigen::VectorXd b1;         // hidden
  Eigen::MatrixXd w2;         // 3 x hidden
  Eigen::Vector3d b2;
  Eigen::MatrixXd embedding;  // steps x embed

 private:
  RewardNetShape shape_;
};

// Per-dimension squared error.
inline Eigen::Vector3d regression_loss(const Eigen::Vector3d& pred, const Eigen::Vector3d& target) {
  return (pred - target).array().square().matrix();
}

using PairList = std::vector<std::pair<int, int>>;

// All ordered pairs (i, j), i != j, whose label values differ by more than eps_tie,
// per dimension. The label of (i, j) is [values_i > values_j].
std::array<PairList, 3> preference_pairs(std::span<const Eigen::Vector3d> values, double eps_tie);

// log(1 + exp(x)) without overflow.
inline double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// log(1 + exp(-(2y - 1) * diff)) for one pair.
inline double pair_loss(double diff, bool preferred) { return softplus(preferred ? -diff : diff); }

// Mean pair loss over each dimension's pair set; 0 for an empty set.
Eigen::Vector3d preference_loss(std::span<const Eigen::Vector3d> preds,
                                std::span<const Eigen::Vector3d> label_values,
                                const std::array<PairList, 3>& pairs);

struct LossWeights {
  Eigen::Vector3d reg = Eigen::Vector3d::Ones();
  Eigen::Vector3d pref = Eigen::Vector3d::Ones();
};

inline double total_loss(const Eigen::Vector3d& reg, const Eigen::Vector3d& pref, const LossWeights& w) {
  return w.reg.dot(reg) + w.pref.dot(pref);
}

// Which reward the pairwise labels are computed from.
enum class PreferenceLabels { latent_target, video };

struct TrainConfig {
  int epochs = 30;
  int batch_size = 16;
  double lr = 1e-2;
  int lr_drop_epoch = 20;
  double lr_drop_factor = 0.1;
  double momentum = 0.9;
  LossWeights weights;
  double eps_tie = 1e-6;
  PreferenceLabels labels = PreferenceLabels::latent_target;
  std::uint64_t seed = 0;

  void validate() const;
  double learning_rate(int epoch) const { return epoch >= lr_drop_epoch ? lr * lr_drop_factor : lr; }
};

struct Example {
  const Latent* z = nullptr;
  Condition cond;
  int t = 0;
  Eigen::Vector3d target;  // regression target r_tilde
  Eigen::Vector3d label;   // values the pairwise labels are drawn from
};

std::vector<Example> make_examples(std::span<const LatentRewardSample* const> samples, PreferenceLabels labels);

struct BatchLoss {
  Eigen::Vector3d reg = Eigen::Vector3d::Zero();  // batch mean per dimension
  Eigen::Vector3d pref = Eigen::Vector3d::Zero();
  double total = 0.0;
};

BatchLoss batch_loss(const RewardNet& net, std::span<const Example> batch, const TrainConfig& config);

struct Backward {
  BatchLoss loss;
  RewardNet grad;
};

// Exact gradient of the batch total loss with respect to every parameter block.
Backward backward(const RewardNet& net, std::span<const Example> batch, const TrainConfig& config);

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int epoch, std::size_t batch_index)
      : std::runtime_error("training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batch_index)),
        epoch(epoch),
        batch_index(batch_index) {}
  int epoch;
  std::size_t batch_index;
};

struct EpochLog {
  int epoch = 0;  // 0 = before any update
  double lr = 0.0;
  BatchLoss loss;  // mean over the epoch's batches
};

struct TrainResult {
  RewardNet net;
  std::vector<EpochLog> log;
};

// SGD with momentum over shuffled minibatches (shuffle stream derived from config.seed).
TrainResult train(RewardNet net, std::span<const LatentRewardSample* const> data, const TrainConfig& config);

// Mean batch loss over the data in index order, without updating.
BatchLoss dataset_loss(const RewardNet& net, std::span<const Example> data, const TrainConfig& config);

using Predictor = std::function<Eigen::Vector3d(const LatentRewardSample&)>;

struct AccuracyCell {
  int t = 0;
  int dim = 0;
  std::optional<double> accuracy;  // absent when the timestep has no valid pairs
  std::size_t pairs = 0;
};

// Held-out pairwise ordering accuracy per (timestep, dimension); pairs are built within a
// single timestep exactly as preference_pairs does. Zero predicted differences are
// resolved by a fair coin from `rng`.
std::vector<AccuracyCell> eval_preference_accuracy(const Predictor& predictor,
                                                   std::span<const LatentRewardSample* const> test,
                                                   std::span<const int> timesteps, double eps_tie,
                                                   RngStream& rng,
                                                   PreferenceLabels labels = PreferenceLabels::latent_target);

Predictor net_predictor(const RewardNet& net);

TensorContainer to_checkpoint(const RewardNet& net, const nlohmann::json& stamp);
RewardNet from_checkpoint(const TensorContainer& c);

}  // namespace latsearch
