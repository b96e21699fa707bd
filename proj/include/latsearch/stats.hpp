// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace latsearch {

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
  double se = 0.0;
  double ci_low = 0.0;  // 95% Student-t interval for the mean
  double ci_high = 0.0;
};

Summary summarize(std::span<const double> x);

enum class Alternative { greater, less, two_sided };

struct WilcoxonResult {
  std::size_t n = 0;     // pairs with a non-zero difference
  double w_plus = 0.0;   // rank sum of positive differences
  double z = 0.0;
  double p = 1.0;
};

// Paired signed-rank test on d_i = x_i - y_i; zero differences are dropped, tied ranks are
// averaged, and p comes from the normal approximation with tie and continuity corrections.
// `greater` tests whether x tends to exceed y.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y,
                                    Alternative alt = Alternative::greater);

struct ChiSquareResult {
  double statistic = 0.0;
  int df = 0;
  double p = 1.0;
};

ChiSquareResult chi_square_gof(std::span<const double> observed, std::span<const double> expected);

// Upper tail of the standard normal.
double normal_sf(double z);

}  // namespace latsearch
