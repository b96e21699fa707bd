// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "latsearch/reward_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace latsearch {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::size_t RewardNetShape::parameter_count() const {
  const auto in = static_cast<std::size_t>(input_width());
  const auto H = static_cast<std::size_t>(hidden);
  return in * H + H + 3 * H + 3 + static_cast<std::size_t>(steps) * static_cast<std::size_t>(embed);
}

void RewardNetShape::validate() const {
  if (frames < 1 || dims < 1 || components < 1 || steps < 2 || embed < 1 || hidden < 1)
    throw std::invalid_argument("reward net: all layer sizes must be positive (steps >= 2)");
}

RewardNet::RewardNet(const RewardNetShape& shape)
    : w1(Eigen::MatrixXd::Zero(shape.hidden, shape.input_width())),
      b1(Eigen::VectorXd::Zero(shape.hidden)),
      w2(Eigen::MatrixXd::Zero(3, shape.hidden)),
      b2(Eigen::Vector3d::Zero()),
      embedding(Eigen::MatrixXd::Zero(shape.steps, shape.embed)),
      shape_(shape) {
  shape.validate();
  if (parameter_count() != shape.parameter_count())
    throw std::logic_error("reward net: parameter count does not match layer sizes");
}

RewardNet RewardNet::initialized(const RewardNetShape& shape, RngStream& rng) {
  RewardNet net(shape);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(shape.input_width()));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(shape.hidden));
  for (Eigen::Index i = 0; i < net.w1.size(); ++i) net.w1.data()[i] = s1 * rng.normal();
  for (Eigen::Index i = 0; i < net.w2.size(); ++i) net.w2.data()[i] = s2 * rng.normal();
  for (Eigen::Index i = 0; i < net.embedding.size(); ++i) net.embedding.data()[i] = rng.normal();
  return net;
}

std::size_t RewardNet::parameter_count() const {
  return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + b2.size() + embedding.size());
}

int RewardNet::embedding_row(int t) const {
  if (t < 0 || t > shape_.steps) throw std::invalid_argument("reward net: timestep out of range");
  return std::min(t, shape_.steps - 1);
}

Eigen::VectorXd RewardNet::input(const Latent& z, const Condition& cond, int t) const {
  if (z.rows() != shape_.frames || z.cols() != shape_.dims)
    throw std::invalid_argument("reward net: latent shape mismatch");
  const int slot = cond.slot(shape_.components);
  if (slot < 0 || slot > shape_.components) throw std::invalid_argument("reward net: condition out of range");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(shape_.input_width());
  const int L = shape_.latent_width();
  x.head(L) = Eigen::Map<const Eigen::VectorXd>(z.data(), L);
  x(L + slot) = 1.0;
  x.tail(shape_.embed) = embedding.row(embedding_row(t)).transpose();
  return x;
}

Eigen::Vector3d RewardNet::predict(const Latent& z, const Condition& cond, int t) const {
  const Eigen::VectorXd h = (w1 * input(z, cond, t) + b1).array().tanh().matrix();
  return w2 * h + b2;
}

Eigen::VectorXd RewardNet::flatten() const {
  Eigen::VectorXd p(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index o = 0;
  for (const Eigen::MatrixXd* m : {&w1, &w2, &embedding}) {
    p.segment(o, m->size()) = m->reshaped();
    o += m->size();
  }
  p.segment(o, b1.size()) = b1;
  o += b1.size();
  p.segment(o, 3) = b2;
  return p;
}

void RewardNet::assign(const Eigen::VectorXd& p) {
  if (p.size() != static_cast<Eigen::Index>(parameter_count()))
    throw std::invalid_argument("reward net: parameter vector length mismatch");
  Eigen::Index o = 0;
  for (Eigen::MatrixXd* m : {&w1, &w2, &embedding}) {
    m->reshaped() = p.segment(o, m->size());
    o += m->size();
  }
  b1 = p.segment(o, b1.size());
  o += b1.size();
  b2 = p.segment(o, 3);
}

std::array<PairList, 3> preference_pairs(std::span<const Eigen::Vector3d> values, double eps_tie) {
  std::array<PairList, 3> pairs;
  const int n = static_cast<int>(values.size());
  for (int d = 0; d < 3; ++d) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j && std::abs(values[static_cast<std::size_t>(i)](d) - values[static_cast<std::size_t>(j)](d)) > eps_tie)
          pairs[static_cast<std::size_t>(d)].emplace_back(i, j);
      }
    }
  }
  return pairs;
}

Eigen::Vector3d preference_loss(std::span<const Eigen::Vector3d> preds,
                                std::span<const Eigen::Vector3d> label_values,
                                const std::array<PairList, 3>& pairs) {
  Eigen::Vector3d loss = Eigen::Vector3d::Zero();
  for (int d = 0; d < 3; ++d) {
    const auto& P = pairs[static_cast<std::size_t>(d)];
    if (P.empty()) continue;
    double sum = 0.0;
    for (auto [i, j] : P) {
      const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
      sum += pair_loss(preds[ui](d) - preds[uj](d), label_values[ui](d) > label_values[uj](d));
    }
    loss(d) = sum / static_cast<double>(P.size());
  }
  return loss;
}

void TrainConfig::validate() const {
  if (epochs < 0) throw std::invalid_argument("train: epochs must be >= 0");
  if (batch_size < 2) throw std::invalid_argument("train: batch_size must be >= 2");
  if (!(lr >= 0.0) || !(lr_drop_factor >= 0.0)) throw std::invalid_argument("train: learning rates must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("train: momentum must lie in [0, 1)");
  if ((weights.reg.array() < 0.0).any() || (weights.pref.array() < 0.0).any())
    throw std::invalid_argument("train: loss weights must be >= 0");
  if (!(eps_tie >= 0.0)) throw std::invalid_argument("train: eps_tie must be >= 0");
}

std::vector<Example> make_examples(std::span<const LatentRewardSample* const> samples, PreferenceLabels labels) {
  std::vector<Example> out;
  out.reserve(samples.size());
  for (const auto* s : samples) {
    out.push_back({&s->z_t, s->cond, s->t, s->r_tilde.as_vector(),
                   labels == PreferenceLabels::video ? s->r_video.as_vector() : s->r_tilde.as_vector()});
  }
  return out;
}

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

struct Forward {
  std::vector<Eigen::VectorXd> x, h;
  std::vector<Eigen::Vector3d> y;
};

Forward forward(const RewardNet& net, std::span<const Example> batch) {
  Forward f;
  for (const auto& ex : batch) {
    Eigen::VectorXd x = net.input(*ex.z, ex.cond, ex.t);
    Eigen::VectorXd h = (net.w1 * x + net.b1).array().tanh().matrix();
    f.y.push_back(net.w2 * h + net.b2);
    f.x.push_back(std::move(x));
    f.h.push_back(std::move(h));
  }
  return f;
}

BatchLoss losses(const Forward& f, std::span<const Example> batch, const std::array<PairList, 3>& pairs,
                 const TrainConfig& config) {
  BatchLoss out;
  std::vector<Eigen::Vector3d> labels;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out.reg += regression_loss(f.y[i], batch[i].target);
    labels.push_back(batch[i].label);
  }
  if (!batch.empty()) out.reg /= static_cast<double>(batch.size());
  out.pref = preference_loss(f.y, labels, pairs);
  out.total = total_loss(out.reg, out.pref, config.weights);
  return out;
}

std::array<PairList, 3> batch_pairs(std::span<const Example> batch, double eps_tie) {
  std::vector<Eigen::Vector3d> labels;
  for (const auto& ex : batch) labels.push_back(ex.label);
  return preference_pairs(labels, eps_tie);
}

}  // namespace

BatchLoss batch_loss(const RewardNet& net, std::span<const Example> batch, const TrainConfig& config) {
  return losses(forward(net, batch), batch, batch_pairs(batch, config.eps_tie), config);
}

Backward backward(const RewardNet& net, std::span<const Example> batch, const TrainConfig& config) {
  const Forward f = forward(net, batch);
  const auto pairs = batch_pairs(batch, config.eps_tie);
  Backward out{losses(f, batch, pairs, config), RewardNet(net.shape())};
  const std::size_t B = batch.size();
  if (B == 0) return out;

  // dL/dy per sample.
  std::vector<Eigen::Vector3d> gy(B, Eigen::Vector3d::Zero());
  for (std::size_t i = 0; i < B; ++i) {
    gy[i] = (2.0 / static_cast<double>(B)) * config.weights.reg.cwiseProduct(f.y[i] - batch[i].target);
  }
  for (int d = 0; d < 3; ++d) {
    const auto& P = pairs[static_cast<std::size_t>(d)];
    if (P.empty() || config.weights.pref(d) == 0.0) continue;
    const double scale = config.weights.pref(d) / static_cast<double>(P.size());
    for (auto [i, j] : P) {
      const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
      const double sign = batch[ui].label(d) > batch[uj].label(d) ? 1.0 : -1.0;
      const double diff = f.y[ui](d) - f.y[uj](d);
      // d/d(diff) softplus(-sign * diff) = -sign * sigmoid(-sign * diff)
      const double g = -sign * sigmoid(-sign * diff) * scale;
      gy[ui](d) += g;
      gy[uj](d) -= g;
    }
  }

  RewardNet& g = out.grad;
  const int E = net.shape().embed;
  for (std::size_t i = 0; i < B; ++i) {
    g.w2.noalias() += gy[i] * f.h[i].transpose();
    g.b2 += gy[i];
    const Eigen::VectorXd ga =
        ((net.w2.transpose() * gy[i]).array() * (1.0 - f.h[i].array().square())).matrix();
    g.w1.noalias() += ga * f.x[i].transpose();
    g.b1 += ga;
    const Eigen::VectorXd gx_embed = net.w1.rightCols(E).transpose() * ga;
    g.embedding.row(net.embedding_row(batch[i].t)) += gx_embed.transpose();
  }
  return out;
}

BatchLoss dataset_loss(const RewardNet& net, std::span<const Example> data, const TrainConfig& config) {
  BatchLoss mean;
  std::size_t batches = 0;
  const auto bs = static_cast<std::size_t>(config.batch_size);
  for (std::size_t start = 0; start < data.size(); start += bs) {
    const auto batch = data.subspan(start, std::min(bs, data.size() - start));
    const BatchLoss l = batch_loss(net, batch, config);
    mean.reg += l.reg;
    mean.pref += l.pref;
    mean.total += l.total;
    ++batches;
  }
  if (batches > 0) {
    mean.reg /= static_cast<double>(batches);
    mean.pref /= static_cast<double>(batches);
    mean.total /= static_cast<double>(batches);
  }
  return mean;
}

TrainResult train(RewardNet net, std::span<const LatentRewardSample* const> data, const TrainConfig& config) {
  config.validate();
  if (data.empty()) throw std::invalid_argument("train: dataset is empty");
  const std::vector<Example> examples = make_examples(data, config.labels);

  TrainResult result{std::move(net), {}};
  result.log.push_back({0, 0.0, dataset_loss(result.net, examples, config)});

  Eigen::VectorXd params = result.net.flatten();
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(params.size());
  std::vector<std::size_t> order(examples.size());
  std::vector<Example> batch;
  const auto bs = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    RngStream shuffle(config.seed, "train.shuffle", static_cast<std::uint64_t>(epoch));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);

    const double lr = config.learning_rate(epoch);
    EpochLog entry{epoch, lr, {}};
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      batch.clear();
      for (std::size_t k = start; k < std::min(start + bs, order.size()); ++k) batch.push_back(examples[order[k]]);
      const Backward bw = backward(result.net, batch, config);
      if (!std::isfinite(bw.loss.total)) throw TrainingDiverged(epoch, batches);
      velocity = config.momentum * velocity + bw.grad.flatten();
      params -= lr * velocity;
      result.net.assign(params);
      entry.loss.reg += bw.loss.reg;
      entry.loss.pref += bw.loss.pref;
      entry.loss.total += bw.loss.total;
      ++batches;
    }
    entry.loss.reg /= static_cast<double>(batches);
    entry.loss.pref /= static_cast<double>(batches);
    entry.loss.total /= static_cast<double>(batches);
    result.log.push_back(entry);
  }
  return result;
}

std::vector<AccuracyCell> eval_preference_accuracy(const Predictor& predictor,
                                                   std::span<const LatentRewardSample* const> test,
                                                   std::span<const int> timesteps, double eps_tie,
                                                   RngStream& rng, PreferenceLabels labels) {
  std::vector<AccuracyCell> cells;
  for (int t : timesteps) {
    std::vector<Eigen::Vector3d> preds, values;
    for (const auto* s : test) {
      if (s->t != t) continue;
      preds.push_back(predictor(*s));
      values.push_back(labels == PreferenceLabels::video ? s->r_video.as_vector() : s->r_tilde.as_vector());
    }
    const auto pairs = preference_pairs(values, eps_tie);
    for (int d = 0; d < 3; ++d) {
      const auto& P = pairs[static_cast<std::size_t>(d)];
      AccuracyCell cell{t, d, std::nullopt, P.size()};
      if (!P.empty()) {
        std::size_t correct = 0;
        for (auto [i, j] : P) {
          const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
          const double diff = preds[ui](d) - preds[uj](d);
          const bool preferred = values[ui](d) > values[uj](d);
          if (diff == 0.0) {
            correct += rng.below(2) == 0 ? 1 : 0;
          } else {
            correct += (diff > 0.0) == preferred ? 1 : 0;
          }
        }
        cell.accuracy = static_cast<double>(correct) / static_cast<double>(P.size());
      }
      cells.push_back(cell);
    }
  }
  return cells;
}

Predictor net_predictor(const RewardNet& net) {
  return [&net](const LatentRewardSample& s) { return net.predict(s.z_t, s.cond, s.t); };
}

namespace {

std::vector<double> row_major(const Eigen::MatrixXd& m) {
  RowMajorMatrix r = m;
  return {r.data(), r.data() + r.size()};
}

Eigen::MatrixXd matrix_from(const TensorBlock& b, Eigen::Index rows, Eigen::Index cols) {
  if (b.data.size() != static_cast<std::size_t>(rows * cols))
    throw IoError("checkpoint: block '" + b.name + "' has the wrong size");
  return Eigen::Map<const RowMajorMatrix>(b.data.data(), rows, cols);
}

}  // namespace

TensorContainer to_checkpoint(const RewardNet& net, const nlohmann::json& stamp) {
  const auto& s = net.shape();
  TensorContainer c;
  c.header = stamp;
  c.header["schema"] = "latsearch.reward_checkpoint/1";
  c.header["frames"] = s.frames;
  c.header["dims"] = s.dims;
  c.header["components"] = s.components;
  c.header["steps"] = s.steps;
  c.header["embed"] = s.embed;
  c.header["hidden"] = s.hidden;
  c.header["parameter_count"] = net.parameter_count();
  auto u = [](Eigen::Index n) { return static_cast<std::uint64_t>(n); };
  c.add("w1", {u(net.w1.rows()), u(net.w1.cols())}, row_major(net.w1));
  c.add("b1", {u(net.b1.size())}, row_major(net.b1));
  c.add("w2", {u(net.w2.rows()), u(net.w2.cols())}, row_major(net.w2));
  c.add("b2", {3}, row_major(net.b2));
  c.add("embedding", {u(net.embedding.rows()), u(net.embedding.cols())}, row_major(net.embedding));
  return c;
}

RewardNet from_checkpoint(const TensorContainer& c) {
  RewardNetShape s;
  try {
    s.frames = c.header.at("frames");
    s.dims = c.header.at("dims");
    s.components = c.header.at("components");
    s.steps = c.header.at("steps");
    s.embed = c.header.at("embed");
    s.hidden = c.header.at("hidden");
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("checkpoint: header missing field: ") + e.what());
  }
  RewardNet net(s);
  net.w1 = matrix_from(c.block("w1"), s.hidden, s.input_width());
  net.b1 = matrix_from(c.block("b1"), s.hidden, 1);
  net.w2 = matrix_from(c.block("w2"), 3, s.hidden);
  net.b2 = matrix_from(c.block("b2"), 3, 1);
  net.embedding = matrix_from(c.block("embedding"), s.steps, s.embed);
  return net;
}

}  // namespace latsearch
