// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "latsearch/oracle.hpp"
#include "latsearch/types.hpp"

#include <algorithm>
#include <string>

namespace latsearch {

enum class CreditKind { cosine, uniform, exponential, l2 };

CreditKind parse_credit_kind(const std::string& name);
std::string to_string(CreditKind kind);

struct CreditStrategy {
  CreditKind kind = CreditKind::cosine;
  double decay = 2.0;  // exponential only

  void validate() const;
};

// s = (1 + cos(z_t, z_0)) / 2 over the flattened latents.
template <typename DerivedA, typename DerivedB>
double cosine_credit(const Eigen::MatrixBase<DerivedA>& zt, const Eigen::MatrixBase<DerivedB>& z0) {
  if (zt.rows() != z0.rows() || zt.cols() != z0.cols())
    throw std::invalid_argument("cosine_credit: shape mismatch");
  const double nt2 = zt.squaredNorm();
  const double n02 = z0.squaredNorm();
  if (!(nt2 > 0.0) || !(n02 > 0.0)) throw DegenerateInput("cosine_credit: zero-norm latent");
  // sqrt(a * a) == a exactly, so (z, z) and (z, -z) land on 1 and 0 without rounding.
  const double cosine = std::clamp(zt.cwiseProduct(z0).sum() / std::sqrt(nt2 * n02), -1.0, 1.0);
  return 0.5 * (1.0 + cosine);
}

// Similarity weight for the latent at timestep t of a trajectory ending in z0.
//   uniform: 1; exponential: exp(-decay t / T); l2: 1 / (1 + ||z_t - z_0||^2 / (F D)).
double credit(const CreditStrategy& strategy, const Latent& zt, const Latent& z0, int t, int steps);

// r_tilde = s * r, component-wise.
RewardVector assign_target(const RewardVector& r, double s);

}  // namespace latsearch
