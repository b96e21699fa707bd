// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "latsearch/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace latsearch {

namespace {

Eigen::VectorXd frame_logits(const Eigen::Ref<const Eigen::RowVectorXd>& frame, int f,
                             const MixtureTarget& target) {
  const int K = target.components();
  const double var = target.component_std * target.component_std;
  const double log_norm = -0.5 * target.dims * std::log(2.0 * std::numbers::pi * var);
  Eigen::VectorXd logits(K);
  for (int k = 0; k < K; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    const Eigen::RowVectorXd mean =
        (target.base_means[idx] + static_cast<double>(f) * target.velocities[idx]).transpose();
    logits(k) = std::log(target.weights[idx]) + log_norm - (frame - mean).squaredNorm() / (2.0 * var);
  }
  return logits;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

void OracleCalibration::validate() const {
  if (!(vq_scale > 0.0) || !(mq_beta > 0.0) || !std::isfinite(vq_center))
    throw std::invalid_argument("calibration: vq_scale and mq_beta must be positive");
}

double frame_log_density(const Eigen::Ref<const Eigen::RowVectorXd>& frame, int f,
                         const MixtureTarget& target) {
  const Eigen::VectorXd logits = frame_logits(frame, f, target);
  const double m = logits.maxCoeff();
  return m + std::log((logits.array() - m).exp().sum());
}

Eigen::VectorXd frame_responsibilities(const Eigen::Ref<const Eigen::RowVectorXd>& frame, int f,
                                       const MixtureTarget& target) {
  const Eigen::VectorXd logits = frame_logits(frame, f, target);
  Eigen::VectorXd p = (logits.array() - logits.maxCoeff()).exp();
  return p / p.sum();
}

double mean_frame_log_density(const Video& video, const MixtureTarget& target) {
  double total = 0.0;
  for (int f = 0; f < target.frames; ++f) total += frame_log_density(video.frames.row(f), f, target);
  return total / target.frames;
}

double motion_residual(const Video& video, int k, const MixtureTarget& target) {
  const Eigen::RowVectorXd v = target.velocities[static_cast<std::size_t>(k)].transpose();
  double total = 0.0;
  for (int f = 0; f + 1 < target.frames; ++f) {
    total += (video.frames.row(f + 1) - video.frames.row(f) - v).squaredNorm();
  }
  return total / (target.frames - 1);
}

RewardVector oracle_reward(const Video& video, const Condition& cond, const MixtureTarget& target,
                           const OracleCalibration& calib) {
  if (cond.is_null()) throw std::invalid_argument("oracle_reward: a prompt condition is required");
  const int k = cond.index();
  if (k < 0 || k >= target.components())
    throw std::invalid_argument("oracle_reward: condition index out of range");
  if (video.frames.rows() != target.frames || video.frames.cols() != target.dims)
    throw std::invalid_argument("oracle_reward: video shape does not match target");

  RewardVector r;
  r.vq = clamp01(logistic((mean_frame_log_density(video, target) - calib.vq_center) / calib.vq_scale));
  r.mq = clamp01(std::exp(-calib.mq_beta * motion_residual(video, k, target)));
  double ta = 0.0;
  for (int f = 0; f < target.frames; ++f) ta += frame_responsibilities(video.frames.row(f), f, target)(k);
  r.ta = clamp01(ta / target.frames);
  return r;
}

Latent sample_clean(const MixtureTarget& target, int k, RngStream& rng) {
  return target.track(k) + target.component_std * rng.normal_latent(target.frames, target.dims);
}

OracleCalibration calibrate(const MixtureTarget& target, int samples, RngStream& rng) {
  if (samples < 1000) throw std::invalid_argument("calibrate: need at least 1000 samples");
  if (!(target.component_std > 0.0)) throw CalibrationFailure("calibrate: component_std must be positive");

  std::vector<double> log_density(static_cast<std::size_t>(samples));
  std::vector<double> residual(static_cast<std::size_t>(samples));
  std::vector<double> cdf(target.weights.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < cdf.size(); ++k) cdf[k] = (acc += target.weights[k]);

  for (std::size_t i = 0; i < log_density.size(); ++i) {
    const double u = rng.uniform() * acc;
    const int k = static_cast<int>(std::upper_bound(cdf.begin(), cdf.end() - 1, u) - cdf.begin());
    Video clean{sample_clean(target, k, rng)};
    log_density[i] = mean_frame_log_density(clean, target);
    residual[i] = motion_residual(clean, k, target);
    if (!std::isfinite(log_density[i]) || !std::isfinite(residual[i]))
      throw CalibrationFailure("calibrate: non-finite clean-sample statistics (degenerate mixture)");
  }

  OracleCalibration c;
  c.vq_center = quantile(log_density, 0.5);
  const double iqr = quantile(log_density, 0.75) - quantile(log_density, 0.25);
  if (!(iqr > 0.0)) throw CalibrationFailure("calibrate: zero interquartile range of log-density");
  c.vq_scale = iqr / 2.0;

  // Mean MQ is strictly decreasing in beta; bisect in log beta.
  auto mean_mq = [&](double beta) {
    double s = 0.0;
    for (double m : residual) s += std::exp(-beta * m);
    return s / static_cast<double>(residual.size());
  };
  double lo = -30.0, hi = 30.0;
  if (mean_mq(std::exp(hi)) > kMqTarget || mean_mq(std::exp(lo)) < kMqTarget)
    throw CalibrationFailure("calibrate: motion residuals are degenerate, cannot set mq_beta");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_mq(std::exp(mid)) > kMqTarget ? lo : hi) = mid;
  }
  c.mq_beta = std::exp(0.5 * (lo + hi));
  return c;
}

}  // namespace latsearch
