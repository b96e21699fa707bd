// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "latsearch/credit.hpp"

#include <cmath>

namespace latsearch {

CreditKind parse_credit_kind(const std::string& name) {
  if (name == "cosine") return CreditKind::cosine;
  if (name == "uniform") return CreditKind::uniform;
  if (name == "exponential") return CreditKind::exponential;
  if (name == "l2") return CreditKind::l2;
  throw std::invalid_argument("unknown credit strategy '" + name + "'");
}

std::string to_string(CreditKind kind) {
  switch (kind) {
    case CreditKind::cosine: return "cosine";
    case CreditKind::uniform: return "uniform";
    case CreditKind::exponential: return "exponential";
    case CreditKind::l2: return "l2";
  }
  return "cosine";
}

void CreditStrategy::validate() const {
  if (kind == CreditKind::exponential && !(decay > 0.0))
    throw std::invalid_argument("credit: exponential decay must be positive");
}

double credit(const CreditStrategy& strategy, const Latent& zt, const Latent& z0, int t, int steps) {
  switch (strategy.kind) {
    case CreditKind::uniform:
      return 1.0;
    case CreditKind::exponential:
      return std::exp(-strategy.decay * static_cast<double>(t) / static_cast<double>(steps));
    case CreditKind::l2: {
      require_same_shape(zt, z0, "credit");
      const double mse = (zt - z0).squaredNorm() / static_cast<double>(zt.size());
      return 1.0 / (1.0 + mse);
    }
    case CreditKind::cosine:
      break;
  }
  return cosine_credit(zt, z0);
}

RewardVector assign_target(const RewardVector& r, double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("assign_target: s must lie in [0, 1]");
  return {s * r.vq, s * r.mq, s * r.ta};
}

}  // namespace latsearch
