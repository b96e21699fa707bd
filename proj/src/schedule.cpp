// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "latsearch/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace latsearch {

namespace {

constexpr double kBetaMax = 0.999;
constexpr double kTerminalAlphaBar = 1e-4;
constexpr double kCosineOffset = 0.008;

std::vector<double> accumulate_betas(const std::vector<double>& betas) {
  std::vector<double> ab(betas.size() + 1);
  ab[0] = 1.0;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    ab[i + 1] = ab[i] * (1.0 - std::min(betas[i], kBetaMax));
  }
  return ab;
}

}  // namespace

ScheduleKind parse_schedule_kind(const std::string& name) {
  if (name == "linear") return ScheduleKind::linear;
  if (name == "cosine") return ScheduleKind::cosine;
  throw std::invalid_argument("unknown schedule kind '" + name + "'");
}

std::string to_string(ScheduleKind kind) {
  return kind == ScheduleKind::linear ? "linear" : "cosine";
}

NoiseSchedule make_schedule(int steps, ScheduleKind kind) {
  if (steps < 2) throw std::invalid_argument("make_schedule: T must be >= 2");
  const auto T = static_cast<std::size_t>(steps);
  std::vector<double> betas(T);
  if (kind == ScheduleKind::linear) {
    // The usual [1e-4, 2e-2] range is defined for 1000 steps; rescale to T.
    const double scale = 1000.0 / static_cast<double>(steps);
    const double lo = 1e-4 * scale;
    const double hi = 2e-2 * scale;
    for (std::size_t i = 0; i < T; ++i) {
      betas[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(T - 1);
    }
  } else {
    auto f = [&](double t) {
      const double u = (t / static_cast<double>(steps) + kCosineOffset) / (1.0 + kCosineOffset);
      const double c = std::cos(u * std::numbers::pi / 2.0);
      return c * c;
    };
    const double f0 = f(0.0);
    for (std::size_t i = 0; i < T; ++i) {
      betas[i] = 1.0 - (f(static_cast<double>(i + 1)) / f0) / (f(static_cast<double>(i)) / f0);
    }
  }
  std::vector<double> ab = accumulate_betas(betas);
  ab[T] = std::min({ab[T], kTerminalAlphaBar, ab[T - 1] / 2.0});
  return NoiseSchedule(std::move(ab), kind);
}

NoiseSchedule::NoiseSchedule(std::vector<double> alpha_bar, ScheduleKind kind)
    : alpha_bar_(std::move(alpha_bar)), kind_(kind) {
  if (alpha_bar_.size() < 3) throw std::invalid_argument("NoiseSchedule: T must be >= 2");
  if (alpha_bar_.front() != 1.0) throw std::invalid_argument("NoiseSchedule: alpha_bar[0] != 1");
  if (alpha_bar_.back() > kTerminalAlphaBar)
    throw std::invalid_argument("NoiseSchedule: alpha_bar[T] > 1e-4");
  for (std::size_t i = 1; i < alpha_bar_.size(); ++i) {
    if (!(alpha_bar_[i] > 0.0 && alpha_bar_[i] < alpha_bar_[i - 1]))
      throw std::invalid_argument("NoiseSchedule: alpha_bar must be positive and strictly decreasing");
  }
  fit_interpolant();
}

double NoiseSchedule::alpha_bar(int t) const {
  if (t < 0 || t > steps()) throw std::invalid_argument("NoiseSchedule: timestep out of range");
  return alpha_bar_[static_cast<std::size_t>(t)];
}

// Fritsch-Carlson slopes on a unit-spaced grid.
void NoiseSchedule::fit_interpolant() {
  const std::size_t n = alpha_bar_.size();
  log_ab_.resize(n);
  for (std::size_t i = 0; i < n; ++i) log_ab_[i] = std::log(alpha_bar_[i]);

  std::vector<double> delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = log_ab_[i + 1] - log_ab_[i];

  knot_slope_.assign(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double a = delta[i - 1];
    const double b = delta[i];
    if (a * b > 0.0) knot_slope_[i] = 2.0 / (1.0 / a + 1.0 / b);
  }
  auto endpoint = [](double d0, double d1) {
    double m = (3.0 * d0 - d1) / 2.0;
    if (m * d0 <= 0.0) return 0.0;
    if (d0 * d1 <= 0.0 && std::abs(m) > 3.0 * std::abs(d0)) return 3.0 * d0;
    return m;
  };
  if (n == 2) {
    knot_slope_[0] = knot_slope_[1] = delta[0];
  } else {
    knot_slope_[0] = endpoint(delta[0], delta[1]);
    knot_slope_[n - 1] = endpoint(delta[n - 2], delta[n - 3]);
  }
}

double NoiseSchedule::log_alpha_bar_at(double t, double* slope) const {
  const double T = static_cast<double>(steps());
  if (!(t >= 0.0 && t <= T)) throw std::invalid_argument("NoiseSchedule: time out of range");
  auto k = static_cast<std::size_t>(std::floor(t));
  if (k >= static_cast<std::size_t>(steps())) k = static_cast<std::size_t>(steps()) - 1;
  const double u = t - static_cast<double>(k);
  const double y0 = log_ab_[k], y1 = log_ab_[k + 1];
  const double m0 = knot_slope_[k], m1 = knot_slope_[k + 1];
  const double u2 = u * u, u3 = u2 * u;
  const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
  const double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
  if (slope) {
    const double d00 = 6 * u2 - 6 * u, d10 = 3 * u2 - 4 * u + 1;
    const double d01 = -6 * u2 + 6 * u, d11 = 3 * u2 - 2 * u;
    *slope = d00 * y0 + d10 * m0 + d01 * y1 + d11 * m1;
  }
  return h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1;
}

double NoiseSchedule::alpha_bar_at(double t) const {
  return std::exp(log_alpha_bar_at(t, nullptr));
}

double NoiseSchedule::beta_at(double t) const {
  double slope = 0.0;
  log_alpha_bar_at(t, &slope);
  return -slope;
}

}  // namespace latsearch
