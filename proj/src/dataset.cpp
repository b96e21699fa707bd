// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "latsearch/dataset.hpp"

#include "latsearch/parallel.hpp"
#include "latsearch/tensor_io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace latsearch {

using nlohmann::json;

void DatasetSpec::validate(int steps) const {
  if (prompts.empty()) throw std::invalid_argument("dataset: prompt list is empty");
  if (seeds_per_prompt < 1) throw std::invalid_argument("dataset: seeds_per_prompt must be >= 1");
  if (timesteps.empty()) throw std::invalid_argument("dataset: timestep set is empty");
  std::set<int> seen;
  for (int t : timesteps) {
    if (t < 1 || t > steps - 1) throw std::invalid_argument("dataset: timesteps must lie in [1, T-1]");
    if (!seen.insert(t).second) throw std::invalid_argument("dataset: duplicate timestep");
  }
  for (const auto& p : prompts)
    if (p.is_null()) throw std::invalid_argument("dataset: prompts must be non-null conditions");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("dataset: train_fraction must lie in (0, 1)");
  strategy.validate();
}

std::size_t LatentDataset::train_count() const {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [](const auto& s) { return s.train; }));
}

std::size_t LatentDataset::test_count() const { return samples.size() - train_count(); }

std::vector<const LatentRewardSample*> LatentDataset::split(bool train) const {
  std::vector<const LatentRewardSample*> out;
  for (const auto& s : samples)
    if (s.train == train) out.push_back(&s);
  return out;
}

Latent dataset_base_noise(std::uint64_t seed, int prompt, int seed_index, int frames, int dims) {
  RngStream rng(seed, "dataset.base", static_cast<std::uint64_t>(prompt),
                static_cast<std::uint64_t>(seed_index));
  return rng.normal_latent(frames, dims);
}

std::vector<Condition> cycle_prompts(int count, int components) {
  std::vector<Condition> out;
  for (int i = 0; i < count; ++i) out.push_back(Condition::prompt(i % components));
  return out;
}

namespace {

struct TrajectoryRecord {
  Latent z0;
  RewardVector reward;
  std::vector<Latent> recorded;  // aligned with spec.timesteps
};

std::vector<bool> split_pairs(std::size_t pairs, double train_fraction, std::uint64_t seed) {
  std::vector<std::size_t> order(pairs);
  std::iota(order.begin(), order.end(), 0);
  RngStream rng(seed, "dataset.split");
  for (std::size_t i = pairs; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(pairs)));
  std::vector<bool> train(pairs, false);
  for (std::size_t i = 0; i < n_train; ++i) train[order[i]] = true;
  return train;
}

void credit_sample(LatentRewardSample& s, const Latent& z0, const CreditStrategy& strategy, int steps) {
  s.s_t = credit(strategy, s.z_t, z0, s.t, steps);
  s.r_tilde = assign_target(s.r_video, s.s_t);
}

}  // namespace

LatentDataset build_dataset(const DatasetSpec& spec, const Pipeline& pipeline) {
  spec.validate(pipeline.steps());
  const int S = spec.seeds_per_prompt;
  const std::size_t pairs = spec.prompts.size() * static_cast<std::size_t>(S);
  const std::set<int> record(spec.timesteps.begin(), spec.timesteps.end());

  std::vector<TrajectoryRecord> runs(pairs);
  parallel_for(pairs, spec.workers, [&](std::size_t pair) {
    const int prompt = static_cast<int>(pair) / S;
    const int seed_index = static_cast<int>(pair) % S;
    const Condition cond = spec.prompts[static_cast<std::size_t>(prompt)];
    const Latent zT = dataset_base_noise(spec.seed, prompt, seed_index, pipeline.frames(), pipeline.dims());
    Trajectory traj = sample_trajectory(zT, pipeline.drift(cond), pipeline.method, record);
    TrajectoryRecord& out = runs[pair];
    out.reward = pipeline.judge(decode(traj.z0, pipeline.decoder), cond);
    for (int t : spec.timesteps) out.recorded.push_back(traj.trace.at(t));
    out.z0 = std::move(traj.z0);
  });

  const std::vector<bool> train = split_pairs(pairs, spec.train_fraction, spec.seed);

  LatentDataset data;
  data.frames = pipeline.frames();
  data.dims = pipeline.dims();
  data.components = pipeline.components();
  data.steps = pipeline.steps();
  data.timesteps = spec.timesteps;
  data.strategy = spec.strategy;
  data.seed = spec.seed;
  data.seeds_per_prompt = S;
  for (std::size_t pair = 0; pair < pairs; ++pair) {
    TrajectoryRecord& run = runs[pair];
    for (std::size_t i = 0; i < spec.timesteps.size(); ++i) {
      LatentRewardSample s;
      s.z_t = std::move(run.recorded[i]);
      s.prompt = static_cast<int>(pair) / S;
      s.seed = static_cast<int>(pair) % S;
      s.pair = static_cast<int>(pair);
      s.cond = spec.prompts[static_cast<std::size_t>(s.prompt)];
      s.t = spec.timesteps[i];
      s.r_video = run.reward;
      s.train = train[pair];
      credit_sample(s, run.z0, spec.strategy, data.steps);
      data.samples.push_back(std::move(s));
    }
    data.clean_latents.push_back(std::move(run.z0));
  }
  return data;
}

LatentDataset recredit(const LatentDataset& data, const CreditStrategy& strategy) {
  strategy.validate();
  LatentDataset out = data;
  out.strategy = strategy;
  for (auto& s : out.samples) credit_sample(s, out.clean_latents[static_cast<std::size_t>(s.pair)], strategy, out.steps);
  return out;
}

namespace {

json reward_json(const RewardVector& r) { return json::array({r.vq, r.mq, r.ta}); }

RewardVector reward_from(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

std::vector<double> flatten_latents(const std::vector<const Latent*>& latents) {
  std::vector<double> flat;
  for (const Latent* z : latents) flat.insert(flat.end(), z->data(), z->data() + z->size());
  return flat;
}

Latent latent_row(const TensorBlock& block, std::size_t row, int frames, int dims) {
  const std::size_t n = static_cast<std::size_t>(frames) * static_cast<std::size_t>(dims);
  if (block.dims.size() != 3 || block.dims[0] <= row || block.dims[1] != static_cast<std::uint64_t>(frames) ||
      block.dims[2] != static_cast<std::uint64_t>(dims))
    throw IoError("dataset: latent reference out of range in block '" + block.name + "'");
  Latent z(frames, dims);
  std::copy_n(block.data.begin() + static_cast<std::ptrdiff_t>(row * n), n, z.data());
  return z;
}

}  // namespace

json dataset_manifest(const LatentDataset& data) {
  std::set<int> train_pairs, test_pairs;
  for (const auto& s : data.samples) (s.train ? train_pairs : test_pairs).insert(s.pair);
  std::vector<int> prompt_conditions;
  const std::size_t prompts = data.clean_latents.size() / static_cast<std::size_t>(std::max(1, data.seeds_per_prompt));
  prompt_conditions.resize(prompts, -1);
  for (const auto& s : data.samples) prompt_conditions[static_cast<std::size_t>(s.prompt)] = s.cond.index();
  return json{
      {"schema", "latsearch.dataset_manifest/1"},
      {"frames", data.frames},
      {"dims", data.dims},
      {"components", data.components},
      {"steps", data.steps},
      {"timesteps", data.timesteps},
      {"strategy", {{"kind", to_string(data.strategy.kind)}, {"decay", data.strategy.decay}}},
      {"prompt_conditions", prompt_conditions},
      {"seeds_per_prompt", data.seeds_per_prompt},
      {"counts",
       {{"samples", data.samples.size()},
        {"trajectories", data.clean_latents.size()},
        {"train_samples", data.train_count()},
        {"test_samples", data.test_count()},
        {"train_pairs", train_pairs.size()},
        {"test_pairs", test_pairs.size()}}},
      {"rng",
       {{"master_seed", data.seed},
        {"base_noise_stream", "dataset.base"},
        {"split_stream", "dataset.split"}}},
  };
}

void write_dataset(const LatentDataset& data, const std::filesystem::path& dir, const json& stamp) {
  std::ostringstream lines;
  std::vector<const Latent*> zt, z0;
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    const auto& s = data.samples[i];
    json rec = {
        {"index", i},
        {"prompt", s.prompt},
        {"seed", s.seed},
        {"pair", s.pair},
        {"cond", s.cond.index()},
        {"t", s.t},
        {"r_video", reward_json(s.r_video)},
        {"s_t", s.s_t},
        {"r_tilde", reward_json(s.r_tilde)},
        {"split", s.train ? "train" : "test"},
        {"z_t", {{"file", "latents.ltsr"}, {"block", "z_t"}, {"row", i}}},
        {"z_0", {{"file", "latents.ltsr"}, {"block", "z_0"}, {"row", s.pair}}},
    };
    rec.update(stamp);
    lines << rec.dump() << '\n';
    zt.push_back(&s.z_t);
  }
  for (const auto& z : data.clean_latents) z0.push_back(&z);

  TensorContainer tensors;
  tensors.header = stamp;
  tensors.header["schema"] = "latsearch.dataset_latents/1";
  const auto F = static_cast<std::uint64_t>(data.frames), D = static_cast<std::uint64_t>(data.dims);
  tensors.add("z_t", {zt.size(), F, D}, flatten_latents(zt));
  tensors.add("z_0", {z0.size(), F, D}, flatten_latents(z0));

  json manifest = dataset_manifest(data);
  manifest.update(stamp);

  write_tensors(dir / "latents.ltsr", tensors);
  write_file_atomic(dir / "samples.jsonl", lines.str());
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

LatentDataset read_dataset(const std::filesystem::path& dir) {
  json manifest;
  try {
    manifest = json::parse(read_file(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw IoError("dataset: bad manifest: " + std::string(e.what()));
  }
  LatentDataset data;
  try {
    data.frames = manifest.at("frames");
    data.dims = manifest.at("dims");
    data.components = manifest.at("components");
    data.steps = manifest.at("steps");
    data.timesteps = manifest.at("timesteps").get<std::vector<int>>();
    data.strategy.kind = parse_credit_kind(manifest.at("strategy").at("kind"));
    data.strategy.decay = manifest.at("strategy").at("decay");
    data.seed = manifest.at("rng").at("master_seed");
    data.seeds_per_prompt = manifest.at("seeds_per_prompt");
  } catch (const json::exception& e) {
    throw IoError("dataset: manifest missing field: " + std::string(e.what()));
  }

  const TensorContainer tensors = read_tensors(dir / "latents.ltsr");
  const TensorBlock& zt = tensors.block("z_t");
  const TensorBlock& z0 = tensors.block("z_0");
  for (std::size_t p = 0; p < z0.dims.at(0); ++p) data.clean_latents.push_back(latent_row(z0, p, data.frames, data.dims));

  std::istringstream in(read_file(dir / "samples.jsonl"));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const json rec = json::parse(line);
      LatentRewardSample s;
      s.prompt = rec.at("prompt");
      s.seed = rec.at("seed");
      s.pair = rec.at("pair");
      s.cond = Condition::prompt(rec.at("cond").get<int>());
      s.t = rec.at("t");
      s.r_video = reward_from(rec.at("r_video"));
      s.s_t = rec.at("s_t");
      s.r_tilde = reward_from(rec.at("r_tilde"));
      s.train = rec.at("split").get<std::string>() == "train";
      s.z_t = latent_row(zt, rec.at("z_t").at("row").get<std::size_t>(), data.frames, data.dims);
      if (!(s.r_tilde == assign_target(s.r_video, s.s_t)))
        throw IoError("dataset: record " + std::to_string(data.samples.size()) + " violates r_tilde = s * r");
      if (static_cast<std::size_t>(s.pair) >= data.clean_latents.size())
        throw IoError("dataset: record references a missing trajectory");
      data.samples.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw IoError("dataset: bad record: " + std::string(e.what()));
    }
  }
  return data;
}

}  // namespace latsearch
