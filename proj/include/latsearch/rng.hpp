// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "latsearch/types.hpp"

#include <cstdint>
#include <random>
#include <string_view>

namespace latsearch {

// Seed derivation for named streams: (master seed, purpose tag, a, b) -> 64-bit seed.
// Streams derived from distinct tuples are independent of scheduling order.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t a = 0,
                          std::uint64_t b = 0);

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}
  RngStream(std::uint64_t master, std::string_view tag, std::uint64_t a = 0, std::uint64_t b = 0)
      : engine_(derive_seed(master, tag, a, b)) {}

  double normal() { return normal_(engine_); }
  // Uniform on [0, 1).
  double uniform() { return std::generate_canonical<double, 64>(engine_); }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  Latent normal_latent(Eigen::Index frames, Eigen::Index dims);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace latsearch
