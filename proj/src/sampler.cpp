// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "latsearch/sampler.hpp"

#include <cmath>

namespace latsearch {

SamplerMethod parse_sampler_method(const std::string& name) {
  if (name == "euler") return SamplerMethod::euler;
  if (name == "heun2") return SamplerMethod::heun2;
  throw std::invalid_argument("unknown sampler method '" + name + "'");
}

std::string to_string(SamplerMethod method) {
  return method == SamplerMethod::euler ? "euler" : "heun2";
}

GuidedDrift::GuidedDrift(const MixtureTarget& target, const NoiseSchedule& sched, Condition cond,
                         double guidance, EvalCounter* counter)
    : target_(&target), sched_(&sched), cond_(cond), guidance_(guidance), counter_(counter) {
  if (!(guidance >= 0.0)) throw std::invalid_argument("GuidedDrift: guidance scale must be >= 0");
}

Latent GuidedDrift::operator()(const Latent& z, double t) const {
  const double ab = sched_->alpha_bar_at(t);
  const double noise_sd = std::sqrt(1.0 - ab);
  if (counter_) {
    ++counter_->drift_calls;
    counter_->eps_evals += eps_evals_per_call();
  }
  Latent score_u = mixture_score_at(z, ab, Condition::null(), *target_);
  Latent guided_score;
  if (guidance_ == 0.0 || cond_.is_null()) {
    guided_score = std::move(score_u);
  } else {
    Latent score_c = mixture_score_at(z, ab, cond_, *target_);
    if (noise_sd > 0.0) {
      Latent eps_w = cfg_combine(-noise_sd * score_u, -noise_sd * score_c, guidance_);
      guided_score = eps_w / -noise_sd;
    } else {
      // t = 0: eps is identically zero, combine the scores directly.
      guided_score = cfg_combine(score_u, score_c, guidance_);
    }
  }
  return -0.5 * sched_->beta_at(t) * (z + guided_score);
}

Latent sampler_step(const Latent& z, int s, SamplerMethod method, const GuidedDrift& drift) {
  if (s < 1 || s > drift.schedule().steps())
    throw std::invalid_argument("sampler_step: step index out of range");
  return integrate_step(z, static_cast<double>(s), static_cast<double>(s - 1), method, drift);
}

Trajectory sample_trajectory(const Latent& zT, const GuidedDrift& drift, SamplerMethod method,
                             const std::set<int>& record) {
  require_finite(zT, "sample_trajectory");
  const int T = drift.schedule().steps();
  Trajectory out;
  Latent z = zT;
  if (record.count(T)) out.trace.emplace(T, z);
  for (int s = T; s >= 1; --s) {
    z = sampler_step(z, s, method, drift);
    if (record.count(s - 1)) out.trace.emplace(s - 1, z);
  }
  out.z0 = std::move(z);
  out.eps_evals = trajectory_eps_evals(T, method, drift.guidance());
  return out;
}

std::int64_t trajectory_eps_evals(int steps, SamplerMethod method, double guidance) {
  return static_cast<std::int64_t>(steps) * drift_evals_per_step(method) * (guidance == 0.0 ? 1 : 2);
}

LinearDecoder LinearDecoder::identity(int dims) {
  return {Eigen::MatrixXd::Identity(dims, dims), Eigen::VectorXd::Zero(dims)};
}

void LinearDecoder::validate(int dims) const {
  if (A.rows() != dims || A.cols() != dims || b.size() != dims)
    throw std::invalid_argument("decoder: A must be dims x dims and b length dims");
  if (!A.allFinite() || !b.allFinite()) throw std::invalid_argument("decoder: non-finite entries");
}

Video decode(const Latent& z0, const LinearDecoder& decoder) {
  require_finite(z0, "decode");
  Video v;
  v.frames = (z0 * decoder.A.transpose()).rowwise() + decoder.b.transpose();
  return v;
}

}  // namespace latsearch
