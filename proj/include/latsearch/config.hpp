// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "latsearch/dataset.hpp"
#include "latsearch/reward_model.hpp"
#include "latsearch/search.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace latsearch {

// Invalid or unknown configuration; `what()` names the dotted field path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AblationAxis { credit, temperature, schedule, loss, budget };

AblationAxis parse_ablation_axis(const std::string& name);
std::string to_string(AblationAxis axis);

struct MixtureConfig {
  double spread = 3.0;
  double speed = 0.5;
  double std = 0.5;
};

struct AblateConfig {
  AblationAxis axis = AblationAxis::temperature;
  std::vector<double> temperatures{0.5, 1.0, 2.0};
  std::vector<std::vector<int>> schedules;  // empty: the four reference schedules rescaled to T
  std::vector<int> budgets{4, 6, 8};
  std::vector<CreditKind> credits{CreditKind::cosine, CreditKind::uniform, CreditKind::exponential, CreditKind::l2};
};

struct RunConfig {
  std::uint64_t seed = 0;
  int workers = 1;
  std::string output_dir;  // empty: environment default

  int frames = 4;
  int dims = 4;
  int components = 4;
  MixtureConfig mixture;
  int steps = 32;
  ScheduleKind schedule = ScheduleKind::cosine;
  SamplerMethod sampler = SamplerMethod::heun2;
  double guidance = 5.0;
  std::optional<LinearDecoder> decoder;  // empty: identity
  int calibration_samples = 4000;

  int prompts = 32;
  int seeds_per_prompt = 8;
  std::vector<int> timesteps{26, 22, 19, 16, 13};
  double train_fraction = 0.8;
  CreditStrategy credit;

  TrainConfig train;
  int embed = 8;
  int hidden = 64;

  SearchMethod method = SearchMethod::latsearch;
  SearchConfig search;  // schedule empty: default rescaled schedule
  bool beam_auto = true;  // beam width matched to mean latsearch survivor count
  int reps = 200;

  AblateConfig ablate;

  void validate() const;
};

// Strict: unknown keys and type mismatches raise ConfigError with the field path.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& c);

// FNV-1a 64 over the canonical JSON of everything that affects results
// (output_dir and workers excluded), as 16 hex digits.
std::string config_hash(const RunConfig& c);

// Fills derived defaults: rescaled search schedule.
RunConfig resolve(RunConfig c);

MixtureTarget make_target(const RunConfig& c);
// Builds the pipeline and calibrates the oracle from the ("calibration") stream.
Pipeline make_pipeline(const RunConfig& c);
DatasetSpec make_dataset_spec(const RunConfig& c);
RewardNetShape make_shape(const RunConfig& c);
TrainConfig make_train_config(const RunConfig& c);

// The four reference schedules {10,15}, {10,15,20}, {10,15,20,25}, {10,15,20,25,30} of 50
// rescaled to `steps`.
std::vector<std::vector<int>> reference_schedules(int steps);

}  // namespace latsearch
