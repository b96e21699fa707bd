// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "latsearch/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace latsearch {

enum class ScheduleKind { linear, cosine };

ScheduleKind parse_schedule_kind(const std::string& name);
std::string to_string(ScheduleKind kind);

// Cumulative signal coefficients alpha_bar[t], t = 0..T, with alpha_bar[0] = 1 and
// alpha_bar[T] <= 1e-4, strictly decreasing.
//
// The sampler integrates in continuous time, so the grid is extended to t in [0, T]
// by monotone cubic (PCHIP) interpolation of log alpha_bar. beta(t) = -d/dt log alpha_bar(t)
// is then continuous and non-negative.
class NoiseSchedule {
 public:
  NoiseSchedule(std::vector<double> alpha_bar, ScheduleKind kind);

  int steps() const { return static_cast<int>(alpha_bar_.size()) - 1; }
  ScheduleKind kind() const { return kind_; }
  std::span<const double> values() const { return alpha_bar_; }

  double alpha_bar(int t) const;
  double alpha_bar_at(double t) const;
  double beta_at(double t) const;

 private:
  void fit_interpolant();
  double log_alpha_bar_at(double t, double* slope) const;

  std::vector<double> alpha_bar_;
  std::vector<double> log_ab_;
  std::vector<double> knot_slope_;
  ScheduleKind kind_;
};

NoiseSchedule make_schedule(int steps, ScheduleKind kind);

// z_t = sqrt(alpha_bar_t) z0 + sqrt(1 - alpha_bar_t) eps.
template <typename DerivedA, typename DerivedB>
Latent forward_diffuse(const Eigen::MatrixBase<DerivedA>& z0, int t,
                       const Eigen::MatrixBase<DerivedB>& eps, const NoiseSchedule& sched) {
  if (z0.rows() != eps.rows() || z0.cols() != eps.cols())
    throw std::invalid_argument("forward_diffuse: shape mismatch");
  const double ab = sched.alpha_bar(t);
  if (t == 0) return z0;
  return std::sqrt(ab) * z0 + std::sqrt(1.0 - ab) * eps;
}

}  // namespace latsearch
