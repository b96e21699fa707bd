// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "latsearch/config.hpp"

#include "latsearch/parallel.hpp"
#include "latsearch/tensor_io.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

namespace latsearch {

using nlohmann::json;

AblationAxis parse_ablation_axis(const std::string& name) {
  if (name == "credit") return AblationAxis::credit;
  if (name == "temperature") return AblationAxis::temperature;
  if (name == "schedule") return AblationAxis::schedule;
  if (name == "loss") return AblationAxis::loss;
  if (name == "budget") return AblationAxis::budget;
  throw std::invalid_argument("unknown ablation axis '" + name + "' (credit, temperature, schedule, loss, budget)");
}

std::string to_string(AblationAxis axis) {
  switch (axis) {
    case AblationAxis::credit: return "credit";
    case AblationAxis::temperature: return "temperature";
    case AblationAxis::schedule: return "schedule";
    case AblationAxis::loss: return "loss";
    case AblationAxis::budget: return "budget";
  }
  return "?";
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw ConfigError(path + ": " + msg); }

void convert(const json& j, int& out, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v < INT32_MIN || v > INT32_MAX) fail(path, "integer out of range");
  out = static_cast<int>(v);
}
void convert(const json& j, std::uint64_t& out, const std::string& path) {
  if (!j.is_number_unsigned()) fail(path, "expected a non-negative integer");
  out = j.get<std::uint64_t>();
}
void convert(const json& j, double& out, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  out = j.get<double>();
}
[[maybe_unused]] void convert(const json& j, bool& out, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected true or false");
  out = j.get<bool>();
}
void convert(const json& j, std::string& out, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  out = j.get<std::string>();
}
template <typename T>
void convert(const json& j, std::vector<T>& out, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  out.clear();
  for (std::size_t i = 0; i < j.size(); ++i) {
    T v{};
    convert(j[i], v, path + "[" + std::to_string(i) + "]");
    out.push_back(std::move(v));
  }
}

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <typename T>
  bool get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return false;
    convert(j_.at(key), out, at(key));
    return true;
  }

  // Reads a string field and maps it through `parse`, reporting parse errors at the field.
  template <typename T, typename Parse>
  void get_enum(const std::string& key, T& out, Parse parse) {
    std::string s;
    if (!get(key, s)) return;
    try {
      out = parse(s);
    } catch (const std::invalid_argument& e) {
      fail(at(key), e.what());
    }
  }

  const json* child(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      (void)v;
      if (!seen_.count(k)) fail(at(k), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Eigen::Vector3d vec3(const std::vector<double>& v, const std::string& path) {
  if (v.size() != 3) fail(path, "expected 3 values (VQ, MQ, TA)");
  return {v[0], v[1], v[2]};
}

}  // namespace

RunConfig parse_config(const json& j) {
  RunConfig c;
  Reader root(j, "");
  root.get("seed", c.seed);
  root.get("workers", c.workers);
  root.get("output_dir", c.output_dir);
  root.get("frames", c.frames);
  root.get("dims", c.dims);
  root.get("components", c.components);

  if (const json* m = root.child("mixture")) {
    Reader r(*m, "mixture");
    r.get("spread", c.mixture.spread);
    r.get("speed", c.mixture.speed);
    r.get("std", c.mixture.std);
    r.finish();
  }
  if (const json* s = root.child("schedule")) {
    Reader r(*s, "schedule");
    r.get("steps", c.steps);
    r.get_enum("kind", c.schedule, parse_schedule_kind);
    r.finish();
  }
  if (const json* s = root.child("sampler")) {
    Reader r(*s, "sampler");
    r.get_enum("method", c.sampler, parse_sampler_method);
    r.get("guidance", c.guidance);
    r.finish();
  }
  if (const json* d = root.child("decoder")) {
    Reader r(*d, "decoder");
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    const bool has_a = r.get("A", A);
    const bool has_b = r.get("b", b);
    r.finish();
    if (has_a != has_b) fail("decoder", "A and b must be given together");
    if (has_a) {
      LinearDecoder dec{Eigen::MatrixXd(static_cast<Eigen::Index>(A.size()), A.empty() ? 0 : static_cast<Eigen::Index>(A[0].size())),
                        Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()))};
      for (std::size_t i = 0; i < A.size(); ++i) {
        if (A[i].size() != A[0].size()) fail("decoder.A", "rows must have equal length");
        for (std::size_t k = 0; k < A[i].size(); ++k)
          dec.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = A[i][k];
      }
      c.decoder = std::move(dec);
    }
  }
  if (const json* s = root.child("calibration")) {
    Reader r(*s, "calibration");
    r.get("samples", c.calibration_samples);
    r.finish();
  }
  if (const json* s = root.child("dataset")) {
    Reader r(*s, "dataset");
    r.get("prompts", c.prompts);
    r.get("seeds_per_prompt", c.seeds_per_prompt);
    r.get("timesteps", c.timesteps);
    r.get("train_fraction", c.train_fraction);
    r.finish();
  }
  if (const json* s = root.child("credit")) {
    Reader r(*s, "credit");
    r.get_enum("strategy", c.credit.kind, parse_credit_kind);
    r.get("decay", c.credit.decay);
    r.finish();
  }
  if (const json* s = root.child("train")) {
    Reader r(*s, "train");
    auto& t = c.train;
    r.get("epochs", t.epochs);
    r.get("batch_size", t.batch_size);
    r.get("lr", t.lr);
    r.get("lr_drop_epoch", t.lr_drop_epoch);
    r.get("lr_drop_factor", t.lr_drop_factor);
    r.get("momentum", t.momentum);
    std::vector<double> v;
    if (r.get("lambda_reg", v)) t.weights.reg = vec3(v, r.at("lambda_reg"));
    if (r.get("lambda_pref", v)) t.weights.pref = vec3(v, r.at("lambda_pref"));
    r.get("eps_tie", t.eps_tie);
    r.get_enum("labels", t.labels, [](const std::string& s) {
      if (s == "latent_target") return PreferenceLabels::latent_target;
      if (s == "video") return PreferenceLabels::video;
      throw std::invalid_argument("unknown preference labels '" + s + "' (latent_target, video)");
    });
    r.get("embed", c.embed);
    r.get("hidden", c.hidden);
    r.finish();
  }
  if (const json* s = root.child("search")) {
    Reader r(*s, "search");
    auto& q = c.search;
    r.get_enum("method", c.method, parse_search_method);
    r.get("candidates", q.candidates);
    r.get("eta", q.eta);
    r.get("temperature", q.temperature);
    r.get("schedule", q.schedule);
    std::vector<double> v;
    if (r.get("reward_weights", v)) q.reward_weights = vec3(v, r.at("reward_weights"));
    if (const json* bw = r.child("beam_width")) {
      if (bw->is_string() && bw->get<std::string>() == "auto") {
        c.beam_auto = true;
      } else {
        convert(*bw, q.beam_width, r.at("beam_width"));
        c.beam_auto = false;
      }
    }
    r.get_enum("judge", q.judge, parse_selection_judge);
    r.get("reps", c.reps);
    r.finish();
  }
  if (const json* s = root.child("ablate")) {
    Reader r(*s, "ablate");
    auto& a = c.ablate;
    r.get_enum("axis", a.axis, parse_ablation_axis);
    r.get("temperatures", a.temperatures);
    r.get("schedules", a.schedules);
    r.get("budgets", a.budgets);
    std::vector<std::string> names;
    if (r.get("credits", names)) {
      a.credits.clear();
      for (std::size_t i = 0; i < names.size(); ++i) {
        try {
          a.credits.push_back(parse_credit_kind(names[i]));
        } catch (const std::invalid_argument& e) {
          fail(r.at("credits") + "[" + std::to_string(i) + "]", e.what());
        }
      }
    }
    r.finish();
  }
  root.finish();
  c = resolve(std::move(c));
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError("config: cannot read " + path.string() + ": " + e.what());
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

RunConfig resolve(RunConfig c) {
  if (c.search.schedule.empty() && c.steps >= 2) c.search.schedule = default_schedule(c.steps);
  if (c.ablate.schedules.empty() && c.steps >= 2) c.ablate.schedules = reference_schedules(c.steps);
  if (c.beam_auto) c.search.beam_width = std::max(1, std::min(2, c.search.candidates));
  return c;
}

void RunConfig::validate() const {
  auto check = [](bool ok, const std::string& path, const std::string& msg) {
    if (!ok) fail(path, msg);
  };
  auto wrap = [](const std::string& path, auto&& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      fail(path, e.what());
    }
  };
  check(workers >= 0, "workers", "must be >= 0 (0 = all cores)");
  check(frames >= 1, "frames", "must be >= 1");
  check(dims >= 1, "dims", "must be >= 1");
  check(components >= 1, "components", "must be >= 1");
  check(steps >= 2, "schedule.steps", "must be >= 2");
  check(guidance >= 0.0, "sampler.guidance", "must be >= 0");
  check(calibration_samples >= 1000, "calibration.samples", "must be >= 1000");
  wrap("mixture", [&] { make_target(*this).validate(); });
  if (decoder) wrap("decoder", [&] { decoder->validate(dims); });
  check(prompts >= 1, "dataset.prompts", "must be >= 1");
  wrap("dataset", [&] { make_dataset_spec(*this).validate(steps); });
  wrap("credit", [&] { credit.validate(); });
  wrap("train", [&] {
    train.validate();
    make_shape(*this).validate();
  });
  wrap("search", [&] { search.validate(steps); });
  check(reps >= 1, "search.reps", "must be >= 1");
  check(beam_auto || search.beam_width <= search.candidates, "search.beam_width", "must lie in [1, candidates]");
  for (double t : ablate.temperatures) check(t > 0.0, "ablate.temperatures", "must be > 0");
  for (int n : ablate.budgets) check(n >= 1, "ablate.budgets", "must be >= 1");
  for (const auto& s : ablate.schedules) {
    SearchConfig probe = search;
    probe.schedule = s;
    wrap("ablate.schedules", [&] { probe.validate(steps); });
  }
}

json to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["output_dir"] = c.output_dir;
  j["frames"] = c.frames;
  j["dims"] = c.dims;
  j["components"] = c.components;
  j["mixture"] = {{"spread", c.mixture.spread}, {"speed", c.mixture.speed}, {"std", c.mixture.std}};
  j["schedule"] = {{"steps", c.steps}, {"kind", to_string(c.schedule)}};
  j["sampler"] = {{"method", to_string(c.sampler)}, {"guidance", c.guidance}};
  if (c.decoder) {
    json A = json::array();
    for (Eigen::Index i = 0; i < c.decoder->A.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index k = 0; k < c.decoder->A.cols(); ++k) row.push_back(c.decoder->A(i, k));
      A.push_back(row);
    }
    j["decoder"] = {{"A", A}, {"b", std::vector<double>(c.decoder->b.data(), c.decoder->b.data() + c.decoder->b.size())}};
  }
  j["calibration"] = {{"samples", c.calibration_samples}};
  j["dataset"] = {{"prompts", c.prompts},
                  {"seeds_per_prompt", c.seeds_per_prompt},
                  {"timesteps", c.timesteps},
                  {"train_fraction", c.train_fraction}};
  j["credit"] = {{"strategy", to_string(c.credit.kind)}, {"decay", c.credit.decay}};
  const auto& t = c.train;
  auto v3 = [](const Eigen::Vector3d& v) { return std::vector<double>{v(0), v(1), v(2)}; };
  j["train"] = {{"epochs", t.epochs},
                {"batch_size", t.batch_size},
                {"lr", t.lr},
                {"lr_drop_epoch", t.lr_drop_epoch},
                {"lr_drop_factor", t.lr_drop_factor},
                {"momentum", t.momentum},
                {"lambda_reg", v3(t.weights.reg)},
                {"lambda_pref", v3(t.weights.pref)},
                {"eps_tie", t.eps_tie},
                {"labels", t.labels == PreferenceLabels::video ? "video" : "latent_target"},
                {"embed", c.embed},
                {"hidden", c.hidden}};
  const auto& q = c.search;
  j["search"] = {{"method", to_string(c.method)},
                 {"candidates", q.candidates},
                 {"eta", q.eta},
                 {"temperature", q.temperature},
                 {"schedule", q.schedule},
                 {"reward_weights", v3(q.reward_weights)},
                 {"beam_width", c.beam_auto ? json("auto") : json(q.beam_width)},
                 {"judge", to_string(q.judge)},
                 {"reps", c.reps}};
  std::vector<std::string> credits;
  for (auto k : c.ablate.credits) credits.push_back(to_string(k));
  j["ablate"] = {{"axis", to_string(c.ablate.axis)},
                 {"temperatures", c.ablate.temperatures},
                 {"schedules", c.ablate.schedules},
                 {"budgets", c.ablate.budgets},
                 {"credits", credits}};
  return j;
}

std::string config_hash(const RunConfig& c) {
  json j = to_json(resolve(c));
  j.erase("output_dir");
  j.erase("workers");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

MixtureTarget make_target(const RunConfig& c) {
  return MixtureTarget::standard(c.frames, c.dims, c.components, c.mixture.spread, c.mixture.speed, c.mixture.std);
}

Pipeline make_pipeline(const RunConfig& c) {
  Pipeline p{make_target(c), make_schedule(c.steps, c.schedule), c.sampler, c.guidance,
             c.decoder.value_or(LinearDecoder::identity(c.dims)), {}};
  RngStream rng(c.seed, "calibration");
  p.calibration = calibrate(p.target, c.calibration_samples, rng);
  return p;
}

DatasetSpec make_dataset_spec(const RunConfig& c) {
  DatasetSpec s;
  s.prompts = cycle_prompts(c.prompts, c.components);
  s.seeds_per_prompt = c.seeds_per_prompt;
  s.timesteps = c.timesteps;
  s.strategy = c.credit;
  s.seed = derive_seed(c.seed, "dataset");
  s.train_fraction = c.train_fraction;
  s.workers = resolve_workers(c.workers);
  return s;
}

RewardNetShape make_shape(const RunConfig& c) {
  return {c.frames, c.dims, c.components, c.steps, c.embed, c.hidden};
}

TrainConfig make_train_config(const RunConfig& c) {
  TrainConfig t = c.train;
  t.seed = derive_seed(c.seed, "train");
  return t;
}

std::vector<std::vector<int>> reference_schedules(int steps) {
  static const std::vector<std::vector<int>> kReference{
      {10, 15}, {10, 15, 20}, {10, 15, 20, 25}, {10, 15, 20, 25, 30}};
  std::vector<std::vector<int>> out;
  for (const auto& s : kReference) out.push_back(rescale_schedule(s, 50, steps));
  return out;
}

}  // namespace latsearch
