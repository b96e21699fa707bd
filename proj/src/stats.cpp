// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "latsearch/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace latsearch {

Summary summarize(std::span<const double> x) {
  Summary s;
  s.n = x.size();
  if (x.empty()) return s;
  s.mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(s.n);
  if (s.n < 2) {
    s.ci_low = s.ci_high = s.mean;
    return s;
  }
  double ss = 0.0;
  for (double v : x) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  s.se = s.std / std::sqrt(static_cast<double>(s.n));
  const boost::math::students_t dist(static_cast<double>(s.n - 1));
  const double q = boost::math::quantile(boost::math::complement(dist, 0.025));
  s.ci_low = s.mean - q * s.se;
  s.ci_high = s.mean + q * s.se;
  return s;
}

double normal_sf(double z) {
  return boost::math::cdf(boost::math::complement(boost::math::normal(), z));
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y, Alternative alt) {
  if (x.size() != y.size()) throw std::invalid_argument("wilcoxon: samples must be paired");
  std::vector<double> d;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] - y[i] != 0.0) d.push_back(x[i] - y[i]);
  WilcoxonResult r;
  r.n = d.size();
  if (r.n == 0) return r;

  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return std::abs(d[a]) < std::abs(d[b]); });
  std::vector<double> rank(d.size());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t k = i;
    while (k + 1 < order.size() && std::abs(d[order[k + 1]]) == std::abs(d[order[i]])) ++k;
    const double avg = 0.5 * static_cast<double>(i + k) + 1.0;
    for (std::size_t m = i; m <= k; ++m) rank[order[m]] = avg;
    const double t = static_cast<double>(k - i + 1);
    tie_term += t * t * t - t;
    i = k + 1;
  }
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] > 0.0) r.w_plus += rank[i];

  const double n = static_cast<double>(r.n);
  const double mu = n * (n + 1.0) / 4.0;
  const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
  if (var <= 0.0) return r;
  const double sd = std::sqrt(var);
  const double diff = r.w_plus - mu;
  switch (alt) {
    case Alternative::greater:
      r.z = (diff - 0.5) / sd;
      r.p = normal_sf(r.z);
      break;
    case Alternative::less:
      r.z = (diff + 0.5) / sd;
      r.p = 1.0 - normal_sf(r.z);
      break;
    case Alternative::two_sided:
      r.z = (diff - std::copysign(0.5, diff)) / sd;
      if (std::abs(diff) < 0.5) r.z = 0.0;
      r.p = std::min(1.0, 2.0 * normal_sf(std::abs(r.z)));
      break;
  }
  return r;
}

ChiSquareResult chi_square_gof(std::span<const double> observed, std::span<const double> expected) {
  if (observed.size() != expected.size() || observed.size() < 2)
    throw std::invalid_argument("chi_square_gof: need matching category counts (>= 2)");
  ChiSquareResult r;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(expected[i] > 0.0)) throw std::invalid_argument("chi_square_gof: expected counts must be > 0");
    r.statistic += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
  }
  r.df = static_cast<int>(observed.size()) - 1;
  r.p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(r.df), r.statistic));
  return r;
}

}  // namespace latsearch
