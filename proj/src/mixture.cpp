// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "latsearch/mixture.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace latsearch {

Latent MixtureTarget::track(int k) const {
  Latent m(frames, dims);
  for (int f = 0; f < frames; ++f) {
    m.row(f) = (base_means[static_cast<std::size_t>(k)] +
                static_cast<double>(f) * velocities[static_cast<std::size_t>(k)])
                   .transpose();
  }
  return m;
}

double MixtureTarget::min_frame_separation() const {
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j < components(); ++j) {
    const Latent a = track(j);
    for (int k = j + 1; k < components(); ++k) {
      const Latent b = track(k);
      for (int f = 0; f < frames; ++f) best = std::min(best, (a.row(f) - b.row(f)).norm());
    }
  }
  return best;
}

void MixtureTarget::validate() const {
  if (frames < 2 || dims < 1) throw std::invalid_argument("mixture: need frames >= 2 and dims >= 1");
  const auto K = weights.size();
  if (K < 1) throw std::invalid_argument("mixture: at least one component required");
  if (base_means.size() != K || velocities.size() != K)
    throw std::invalid_argument("mixture: means/velocities/weights length mismatch");
  for (std::size_t k = 0; k < K; ++k) {
    if (base_means[k].size() != dims || velocities[k].size() != dims)
      throw std::invalid_argument("mixture: mean/velocity width must equal dims");
    if (!base_means[k].allFinite() || !velocities[k].allFinite())
      throw std::invalid_argument("mixture: non-finite mean or velocity");
    if (!(weights[k] > 0.0)) throw std::invalid_argument("mixture: weights must be positive");
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("mixture: weights must sum to 1");
  if (!(component_std > 0.0) || !std::isfinite(component_std))
    throw std::invalid_argument("mixture: component_std must be positive");
  if (K > 1 && min_frame_separation() < 4.0 * component_std)
    throw std::invalid_argument("mixture: component tracks closer than 4 * component_std");
}

MixtureTarget MixtureTarget::standard(int frames, int dims, int components, double spread,
                                      double speed, double component_std) {
  if (components > 2 * dims)
    throw std::invalid_argument("mixture: standard layout supports at most 2 * dims components");
  MixtureTarget m;
  m.frames = frames;
  m.dims = dims;
  m.component_std = component_std;
  for (int k = 0; k < components; ++k) {
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(dims);
    mu(k % dims) = k < dims ? spread : -spread;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dims);
    v((k + 1) % dims) = speed;
    m.base_means.push_back(mu);
    m.velocities.push_back(v);
    m.weights.push_back(1.0 / components);
  }
  return m;
}

namespace {

// Per-component log N(z; sqrt(ab) m_k, var I) up to the shared normalizer, plus log w_k.
Eigen::VectorXd component_logits(const Latent& z, double alpha_bar, const MixtureTarget& target,
                                 std::vector<Latent>* residuals) {
  const int K = target.components();
  const double var = diffused_variance(alpha_bar, target.component_std);
  const double signal = std::sqrt(alpha_bar);
  Eigen::VectorXd logits(K);
  if (residuals) residuals->resize(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    Latent r = z - signal * target.track(k);
    logits(k) = std::log(target.weights[static_cast<std::size_t>(k)]) - r.squaredNorm() / (2.0 * var);
    if (residuals) (*residuals)[static_cast<std::size_t>(k)] = std::move(r);
  }
  return logits;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  Eigen::VectorXd p = (logits.array() - logits.maxCoeff()).exp();
  return p / p.sum();
}

void check_shape(const Latent& z, const MixtureTarget& target) {
  if (z.rows() != target.frames || z.cols() != target.dims)
    throw std::invalid_argument("mixture_score: latent shape does not match target");
}

}  // namespace

Eigen::VectorXd mixture_responsibilities(const Latent& z, double alpha_bar,
                                         const MixtureTarget& target) {
  check_shape(z, target);
  return softmax(component_logits(z, alpha_bar, target, nullptr));
}

Latent mixture_score_at(const Latent& z, double alpha_bar, const Condition& cond,
                        const MixtureTarget& target) {
  check_shape(z, target);
  const double var = diffused_variance(alpha_bar, target.component_std);
  if (!cond.is_null()) {
    const int k = cond.index();
    if (k < 0 || k >= target.components())
      throw std::invalid_argument("mixture_score: condition index out of range");
    return -(z - std::sqrt(alpha_bar) * target.track(k)) / var;
  }
  std::vector<Latent> residuals;
  const Eigen::VectorXd resp = softmax(component_logits(z, alpha_bar, target, &residuals));
  Latent score = Latent::Zero(z.rows(), z.cols());
  for (int k = 0; k < target.components(); ++k) {
    score -= resp(k) * residuals[static_cast<std::size_t>(k)];
  }
  return score / var;
}

Latent mixture_score(const Latent& z, int t, const Condition& cond, const MixtureTarget& target,
                     const NoiseSchedule& sched) {
  if (t < 1 || t > sched.steps()) throw std::invalid_argument("mixture_score: t out of range");
  return mixture_score_at(z, sched.alpha_bar(t), cond, target);
}

}  // namespace latsearch
