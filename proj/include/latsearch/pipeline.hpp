// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "latsearch/oracle.hpp"
#include "latsearch/sampler.hpp"

namespace latsearch {

// Everything needed to turn base noise into a judged video.
struct Pipeline {
  MixtureTarget target;
  NoiseSchedule schedule;
  SamplerMethod method = SamplerMethod::heun2;
  double guidance = 5.0;
  LinearDecoder decoder;
  OracleCalibration calibration;

  int steps() const { return schedule.steps(); }
  int frames() const { return target.frames; }
  int dims() const { return target.dims; }
  int components() const { return target.components(); }

  GuidedDrift drift(const Condition& cond, EvalCounter* counter = nullptr) const {
    return GuidedDrift(target, schedule, cond, guidance, counter);
  }
  RewardVector judge(const Video& video, const Condition& cond) const {
    return oracle_reward(video, cond, target, calibration);
  }
};

}  // namespace latsearch
