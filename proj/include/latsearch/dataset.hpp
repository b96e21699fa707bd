// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "latsearch/credit.hpp"
#include "latsearch/pipeline.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <vector>

namespace latsearch {

struct LatentRewardSample {
  Latent z_t;
  Condition cond;
  int t = 0;
  RewardVector r_video;
  double s_t = 1.0;
  RewardVector r_tilde;
  int prompt = 0;
  int seed = 0;
  int pair = 0;  // trajectory index: prompt * seeds_per_prompt + seed
  bool train = true;
};

struct DatasetSpec {
  std::vector<Condition> prompts;
  int seeds_per_prompt = 8;
  std::vector<int> timesteps;
  CreditStrategy strategy;
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
  int workers = 1;

  void validate(int steps) const;
};

struct LatentDataset {
  int frames = 0;
  int dims = 0;
  int components = 0;
  int steps = 0;
  std::vector<int> timesteps;
  CreditStrategy strategy;
  std::uint64_t seed = 0;
  int seeds_per_prompt = 0;
  std::vector<LatentRewardSample> samples;
  std::vector<Latent> clean_latents;  // z_0 per trajectory (pair)

  std::size_t train_count() const;
  std::size_t test_count() const;
  std::vector<const LatentRewardSample*> split(bool train) const;
};

// Base noise for trajectory (prompt, seed) of a dataset.
Latent dataset_base_noise(std::uint64_t seed, int prompt, int seed_index, int frames, int dims);

// Prompt i conditions on component i mod K.
std::vector<Condition> cycle_prompts(int count, int components);

LatentDataset build_dataset(const DatasetSpec& spec, const Pipeline& pipeline);

// Recompute s_t and r_tilde under another strategy, keeping latents, rewards and split.
LatentDataset recredit(const LatentDataset& data, const CreditStrategy& strategy);

// Files: samples.jsonl (one record per sample), latents.ltsr (sidecar tensors),
// manifest.json. `stamp` (config hash, tool version) is embedded in every file.
void write_dataset(const LatentDataset& data, const std::filesystem::path& dir,
                   const nlohmann::json& stamp);
// Verifies r_tilde == s_t * r_video bit-for-bit on every record.
LatentDataset read_dataset(const std::filesystem::path& dir);

nlohmann::json dataset_manifest(const LatentDataset& data);

}  // namespace latsearch
