// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "latsearch/mixture.hpp"
#include "latsearch/rng.hpp"
#include "latsearch/types.hpp"

namespace latsearch {

// Visual quality, motion quality, text alignment; each in [0, 1] for oracle output.
struct RewardVector {
  double vq = 0.0;
  double mq = 0.0;
  double ta = 0.0;

  Eigen::Vector3d as_vector() const { return {vq, mq, ta}; }
  static RewardVector from(const Eigen::Vector3d& v) { return {v(0), v(1), v(2)}; }
  double operator[](int d) const { return d == 0 ? vq : (d == 1 ? mq : ta); }
  friend bool operator==(const RewardVector&, const RewardVector&) = default;
};

inline constexpr const char* kRewardAxes[3] = {"VQ", "MQ", "TA"};

struct OracleCalibration {
  double vq_center = 0.0;
  double vq_scale = 1.0;
  double mq_beta = 1.0;

  void validate() const;
};

// log of sum_k w_k N(frame; mu_k + f v_k, std^2 I).
double frame_log_density(const Eigen::Ref<const Eigen::RowVectorXd>& frame, int f,
                         const MixtureTarget& target);
// Posterior responsibilities of each component for a single frame.
Eigen::VectorXd frame_responsibilities(const Eigen::Ref<const Eigen::RowVectorXd>& frame, int f,
                                       const MixtureTarget& target);
double mean_frame_log_density(const Video& video, const MixtureTarget& target);
// Mean squared deviation of frame-to-frame motion from v_k.
double motion_residual(const Video& video, int k, const MixtureTarget& target);

RewardVector oracle_reward(const Video& video, const Condition& cond, const MixtureTarget& target,
                           const OracleCalibration& calib);

// A clean sample from component k (no diffusion noise).
Latent sample_clean(const MixtureTarget& target, int k, RngStream& rng);

// vq_center = median clean log-density, vq_scale = IQR / 2, mq_beta solved so the
// clean-sample mean MQ equals kMqTarget.
inline constexpr double kMqTarget = 0.85;
OracleCalibration calibrate(const MixtureTarget& target, int samples, RngStream& rng);

}  // namespace latsearch
