// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "latsearch/schedule.hpp"
#include "latsearch/types.hpp"

#include <vector>

namespace latsearch {

// Data distribution for the testbed: K isotropic Gaussians over (F x D) latents.
// Component k has per-frame mean mu_k + f * v_k, so every component carries its own
// motion (frame-to-frame drift v_k).
struct MixtureTarget {
  int frames = 4;
  int dims = 4;
  std::vector<Eigen::VectorXd> base_means;  // mu_k, length D
  std::vector<Eigen::VectorXd> velocities;  // v_k, length D
  double component_std = 0.5;
  std::vector<double> weights;

  int components() const { return static_cast<int>(weights.size()); }
  Latent track(int k) const;  // noiseless (F x D) mean of component k
  // Smallest same-frame distance between two component tracks.
  double min_frame_separation() const;
  void validate() const;

  // mu_k = spread * (+/-) e_{k mod D}, v_k = speed * e_{(k+1) mod D}, equal weights.
  static MixtureTarget standard(int frames, int dims, int components, double spread = 3.0,
                                double speed = 0.5, double component_std = 0.5);
};

// Variance per coordinate of the diffused component at signal level alpha_bar.
inline double diffused_variance(double alpha_bar, double component_std) {
  return (1.0 - alpha_bar) + alpha_bar * component_std * component_std;
}

// grad_z log p_t(z | cond) for the diffused mixture at signal level alpha_bar.
// Null uses all components with prior weights; a prompt uses only its component.
Latent mixture_score_at(const Latent& z, double alpha_bar, const Condition& cond,
                        const MixtureTarget& target);

// Integer-timestep form; requires 1 <= t <= T.
Latent mixture_score(const Latent& z, int t, const Condition& cond, const MixtureTarget& target,
                     const NoiseSchedule& sched);

// Posterior component responsibilities of z under the diffused (unconditional) mixture.
Eigen::VectorXd mixture_responsibilities(const Latent& z, double alpha_bar,
                                         const MixtureTarget& target);

// eps_hat = -sqrt(1 - alpha_bar_t) * score, and its inverse.
template <typename Derived>
Latent score_to_eps(const Eigen::MatrixBase<Derived>& score, int t, const NoiseSchedule& sched) {
  if (t < 1) throw std::invalid_argument("score_to_eps: t must be >= 1");
  return -std::sqrt(1.0 - sched.alpha_bar(t)) * score;
}

template <typename Derived>
Latent eps_to_score(const Eigen::MatrixBase<Derived>& eps, int t, const NoiseSchedule& sched) {
  if (t < 1) throw std::invalid_argument("eps_to_score: t must be >= 1");
  return eps / -std::sqrt(1.0 - sched.alpha_bar(t));
}

// Classifier-free guidance: eps_uncond + w (eps_cond - eps_uncond).
template <typename DerivedA, typename DerivedB>
Latent cfg_combine(const Eigen::MatrixBase<DerivedA>& eps_uncond,
                   const Eigen::MatrixBase<DerivedB>& eps_cond, double w) {
  if (!(w >= 0.0)) throw std::invalid_argument("cfg_combine: guidance scale must be >= 0");
  if (eps_uncond.rows() != eps_cond.rows() || eps_uncond.cols() != eps_cond.cols())
    throw std::invalid_argument("cfg_combine: shape mismatch");
  return eps_uncond + w * (eps_cond - eps_uncond);
}

}  // namespace latsearch
