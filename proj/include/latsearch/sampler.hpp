// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "latsearch/mixture.hpp"
#include "latsearch/schedule.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>

namespace latsearch {

enum class SamplerMethod { euler, heun2 };

SamplerMethod parse_sampler_method(const std::string& name);
std::string to_string(SamplerMethod method);
inline int drift_evals_per_step(SamplerMethod m) { return m == SamplerMethod::heun2 ? 2 : 1; }

// Instrumented denoiser counter. One drift call costs one or two eps evaluations
// depending on whether guidance needs the unconditional branch.
struct EvalCounter {
  std::int64_t drift_calls = 0;
  std::int64_t eps_evals = 0;
};

// Probability-flow drift of the VP process with classifier-free guidance applied to the
// analytic mixture noise prediction:
//   f(z, t) = -1/2 beta(t) (z + score_w(z, t)),  score_w = -eps_w / sqrt(1 - alpha_bar(t)).
class GuidedDrift {
 public:
  GuidedDrift(const MixtureTarget& target, const NoiseSchedule& sched, Condition cond,
              double guidance, EvalCounter* counter = nullptr);

  Latent operator()(const Latent& z, double t) const;

  int eps_evals_per_call() const { return guidance_ == 0.0 ? 1 : 2; }
  const NoiseSchedule& schedule() const { return *sched_; }
  const Condition& condition() const { return cond_; }
  double guidance() const { return guidance_; }

 private:
  const MixtureTarget* target_;
  const NoiseSchedule* sched_;
  Condition cond_;
  double guidance_;
  EvalCounter* counter_;
};

// One explicit step of dz/dt = f(z, t) from t_from to t_to (signed h = t_to - t_from).
// heun2: z + h/2 (f(z, t_from) + f(z + h f(z, t_from), t_to)); euler: predictor only.
template <typename Drift>
Latent integrate_step(const Latent& z, double t_from, double t_to, SamplerMethod method,
                      const Drift& f) {
  const double h = t_to - t_from;
  Latent k1 = f(z, t_from);
  Latent predictor = z + h * k1;
  if (method == SamplerMethod::euler) return predictor;
  Latent k2 = f(predictor, t_to);
  return z + (h / 2.0) * (k1 + k2);
}

// Sampler step s (1 <= s <= T) takes the latent from timestep s to s - 1.
Latent sampler_step(const Latent& z, int s, SamplerMethod method, const GuidedDrift& drift);

struct Trajectory {
  Latent z0;
  std::map<int, Latent> trace;  // timestep -> latent
  std::int64_t eps_evals = 0;
};

// Integrates from t = T down to 0, keeping the latent at each requested timestep.
Trajectory sample_trajectory(const Latent& zT, const GuidedDrift& drift, SamplerMethod method,
                             const std::set<int>& record = {});

// Expected eps evaluations for a full trajectory: steps x drift calls x branches.
std::int64_t trajectory_eps_evals(int steps, SamplerMethod method, double guidance);

// Fixed per-frame affine decoder: frame_f -> A frame_f + b.
struct LinearDecoder {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;

  static LinearDecoder identity(int dims);
  void validate(int dims) const;
};

Video decode(const Latent& z0, const LinearDecoder& decoder);

}  // namespace latsearch
