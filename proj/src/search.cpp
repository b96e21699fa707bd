// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "latsearch/search.hpp"

#include "latsearch/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace latsearch {

SearchMethod parse_search_method(const std::string& name) {
  if (name == "vanilla") return SearchMethod::vanilla;
  if (name == "latsearch") return SearchMethod::latsearch;
  if (name == "best_of_n") return SearchMethod::best_of_n;
  if (name == "beam") return SearchMethod::beam;
  throw std::invalid_argument("unknown search method '" + name + "' (vanilla, latsearch, best_of_n, beam)");
}

std::string to_string(SearchMethod method) {
  switch (method) {
    case SearchMethod::vanilla: return "vanilla";
    case SearchMethod::latsearch: return "latsearch";
    case SearchMethod::best_of_n: return "best_of_n";
    case SearchMethod::beam: return "beam";
  }
  return "?";
}

SelectionJudge parse_selection_judge(const std::string& name) {
  if (name == "oracle") return SelectionJudge::oracle;
  if (name == "reward_model") return SelectionJudge::reward_model;
  throw std::invalid_argument("unknown selection judge '" + name + "' (oracle, reward_model)");
}

std::string to_string(SelectionJudge judge) {
  return judge == SelectionJudge::oracle ? "oracle" : "reward_model";
}

void SearchConfig::validate(int steps) const {
  if (candidates < 1) throw std::invalid_argument("search: candidates must be >= 1");
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("search: eta must lie in [0, 1]");
  if (!(temperature > 0.0) || !std::isfinite(temperature))
    throw std::invalid_argument("search: temperature must be > 0");
  if (schedule.empty()) throw std::invalid_argument("search: schedule must not be empty");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] < 1 || schedule[i] > steps - 1)
      throw std::invalid_argument("search: schedule steps must lie in [1, T-1]");
    if (i > 0 && schedule[i] <= schedule[i - 1])
      throw std::invalid_argument("search: schedule must be strictly ascending");
  }
  if ((reward_weights.array() < 0.0).any() || std::abs(reward_weights.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("search: reward weights must be >= 0 and sum to 1");
  if (beam_width < 1) throw std::invalid_argument("search: beam_width must be >= 1");
}

std::vector<int> rescale_schedule(std::span<const int> reference, int reference_steps, int steps) {
  if (reference_steps < 1 || steps < 2) throw std::invalid_argument("rescale_schedule: bad step counts");
  std::vector<int> out;
  for (int j : reference) {
    const int mapped = static_cast<int>(std::lround(static_cast<double>(j) * steps / reference_steps));
    const int clamped = std::clamp(mapped, 1, steps - 1);
    if (out.empty() || out.back() != clamped) out.push_back(clamped);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> default_schedule(int steps) {
  static constexpr int kReference[] = {10, 15, 20};
  return rescale_schedule(kReference, 50, steps);
}

std::vector<Candidate> init_candidates(const Latent& base, int n, double eta, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("init_candidates: n must be >= 1");
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("init_candidates: eta must lie in [0, 1]");
  require_finite(base, "init_candidates");
  std::vector<Candidate> out;
  out.reserve(static_cast<std::size_t>(n));
  out.push_back({base, 0, 0.0});
  const double keep = std::sqrt(1.0 - eta * eta);
  for (int i = 1; i < n; ++i) {
    RngStream rng(seed, "search.init", static_cast<std::uint64_t>(i));
    out.push_back({keep * base + eta * rng.normal_latent(base.rows(), base.cols()), i, 0.0});
  }
  return out;
}

double composite_reward(const RewardVector& r, const Eigen::Vector3d& weights) {
  return weights.dot(r.as_vector());
}

std::vector<double> softmax_weights(std::span<const double> rewards, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("softmax_weights: temperature must be > 0");
  if (rewards.empty()) throw std::invalid_argument("softmax_weights: empty reward list");
  const double top = *std::max_element(rewards.begin(), rewards.end());
  std::vector<double> w(rewards.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    w[i] = std::exp(tau * (rewards[i] - top));
    sum += w[i];
  }
  for (double& x : w) x /= sum;
  return w;
}

Resample resample_unique(std::span<const double> weights, int draws, RngStream& rng) {
  if (weights.empty() || draws < 1) throw std::invalid_argument("resample_unique: need weights and draws >= 1");
  std::vector<double> cdf(weights.size());
  std::partial_sum(weights.begin(), weights.end(), cdf.begin());
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i)
    if (weights[i] > 0.0) last_positive = i;
  Resample out;
  out.multiplicities.assign(weights.size(), 0);
  for (int d = 0; d < draws; ++d) {
    const double u = rng.uniform() * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t idx = it == cdf.end() ? last_positive : static_cast<std::size_t>(it - cdf.begin());
    ++out.multiplicities[std::min(idx, last_positive)];
  }
  for (std::size_t i = 0; i < weights.size(); ++i)
    if (out.multiplicities[i] > 0) out.survivors.push_back(static_cast<int>(i));
  return out;
}

std::size_t final_prune(std::span<const double> cumulative, std::span<const int> seed_ids) {
  if (cumulative.empty() || cumulative.size() != seed_ids.size())
    throw std::logic_error("final_prune: empty or misaligned candidate set");
  std::size_t best = 0;
  for (std::size_t i = 1; i < cumulative.size(); ++i) {
    if (cumulative[i] > cumulative[best] || (cumulative[i] == cumulative[best] && seed_ids[i] < seed_ids[best]))
      best = i;
  }
  return best;
}

LatentJudge reward_model_judge(const RewardNet& net) {
  return [&net](const Latent& z, const Condition& cond, int t) {
    return RewardVector::from(net.predict(z, cond, t).cwiseMax(0.0).cwiseMin(1.0));
  };
}

namespace {

using Clock = std::chrono::steady_clock;

// Lap clock: each charge() bills the time since the previous boundary to one phase, so the
// phases tile the run. total() reads the clock again from the start.
class PhaseClock {
 public:
  PhaseClock() : start_(Clock::now()), mark_(start_) {}
  void charge(double& bucket) {
    const auto now = Clock::now();
    bucket += std::chrono::duration<double>(now - mark_).count();
    mark_ = now;
  }
  double total() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

 private:
  Clock::time_point start_, mark_;
};

SearchTrace make_trace(SearchMethod method, const SearchConfig& cfg, const Condition& cond, const Latent& base) {
  SearchTrace t;
  t.method = method;
  t.candidates = method == SearchMethod::vanilla ? 1 : cfg.candidates;
  t.eta = cfg.eta;
  t.temperature = cfg.temperature;
  t.beam_width = method == SearchMethod::beam ? cfg.beam_width : 0;
  if (method == SearchMethod::latsearch || method == SearchMethod::beam) t.schedule = cfg.schedule;
  t.seed = cfg.seed;
  t.reward_weights = cfg.reward_weights;
  t.selection = cfg.judge;
  t.cond = cond;
  t.base = base;
  return t;
}

// Counters are indexed by seed id so concurrent candidates never share one.
void finish_counts(SearchTrace& trace, const std::vector<EvalCounter>& counters, const Pipeline& pipeline) {
  for (const auto& c : counters) {
    trace.counts.drift_calls += c.drift_calls;
    trace.counts.eps_evals += c.eps_evals;
  }
  const std::int64_t expected =
      trace.counts.step_units * drift_evals_per_step(pipeline.method) * (pipeline.guidance == 0.0 ? 1 : 2);
  if (trace.counts.eps_evals != expected)
    throw std::logic_error("search: eps evaluation counter disagrees with step accounting");
}

void advance(std::vector<Candidate>& active, int s, const Condition& cond, const Pipeline& pipeline,
             std::vector<EvalCounter>& counters, int workers) {
  parallel_for(active.size(), workers, [&](std::size_t i) {
    Candidate& c = active[i];
    const GuidedDrift drift = pipeline.drift(cond, &counters[static_cast<std::size_t>(c.seed_id)]);
    c.latent = sampler_step(c.latent, s, pipeline.method, drift);
  });
}

ScoringRecord score_active(const std::vector<Candidate>& active, int j, int timestep, const Condition& cond,
                           const LatentJudge& judge, const Eigen::Vector3d& weights, SearchTrace& trace) {
  ScoringRecord rec;
  rec.step = j;
  rec.timestep = timestep;
  for (const auto& c : active) {
    const RewardVector r = judge(c.latent, cond, timestep);
    ++trace.counts.reward_evals;
    rec.seed_ids.push_back(c.seed_id);
    rec.rewards.push_back(r);
    rec.composite.push_back(composite_reward(r, weights));
    if (!std::isfinite(rec.composite.back())) {
      trace.scoring.push_back(rec);
      throw SearchAborted("search aborted: non-finite reward for seed " + std::to_string(c.seed_id) +
                              " at step " + std::to_string(j),
                          trace);
    }
  }
  return rec;
}

}  // namespace

SearchResult vanilla(const Latent& base, const Condition& cond, const Pipeline& pipeline) {
  PhaseClock clock;
  SearchConfig cfg;
  cfg.candidates = 1;
  SearchTrace trace = make_trace(SearchMethod::vanilla, cfg, cond, base);
  std::vector<EvalCounter> counters(1);
  const int T = pipeline.steps();

  std::vector<Candidate> active{{base, 0, 0.0}};
  for (int j = 1; j <= T; ++j) {
    advance(active, T - j + 1, cond, pipeline, counters, 1);
    ++trace.counts.step_units;
  }
  clock.charge(trace.times.denoiser);

  Video video = decode(active[0].latent, pipeline.decoder);
  ++trace.counts.decodes;
  clock.charge(trace.times.decoder);

  finish_counts(trace, counters, pipeline);
  clock.charge(trace.times.denoiser);  // count audit
  trace.times.total = clock.total();
  return {std::move(video), std::move(active[0].latent), std::move(trace)};
}

SearchResult latsearch(const Latent& base, const Condition& cond, const SearchConfig& config,
                       const Pipeline& pipeline, const LatentJudge& judge) {
  PhaseClock clock;
  const int T = pipeline.steps();
  config.validate(T);
  SearchTrace trace = make_trace(SearchMethod::latsearch, config, cond, base);
  std::vector<EvalCounter> counters(static_cast<std::size_t>(config.candidates));
  const std::set<int> scoring(config.schedule.begin(), config.schedule.end());
  const int last = config.schedule.back();

  std::vector<Candidate> active = init_candidates(base, config.candidates, config.eta, config.seed);
  clock.charge(trace.times.denoiser);

  for (int j = 1; j <= T; ++j) {
    advance(active, T - j + 1, cond, pipeline, counters, config.workers);
    trace.counts.step_units += static_cast<std::int64_t>(active.size());
    clock.charge(trace.times.denoiser);
    if (!scoring.count(j)) continue;

    ScoringRecord rec = score_active(active, j, T - j, cond, judge, config.reward_weights, trace);
    rec.weights = softmax_weights(rec.composite, config.temperature);
    for (std::size_t i = 0; i < active.size(); ++i) {
      active[i].cumulative = accumulate(active[i].cumulative, rec.weights[i]);
      rec.cumulative.push_back(active[i].cumulative);
    }
    RngStream rng(config.seed, "search.resample", static_cast<std::uint64_t>(j));
    const Resample rs = resample_unique(rec.weights, static_cast<int>(active.size()), rng);
    rec.multiplicities = rs.multiplicities;
    std::vector<Candidate> kept;
    for (int i : rs.survivors) kept.push_back(std::move(active[static_cast<std::size_t>(i)]));
    active = std::move(kept);
    if (j == last && active.size() > 1) {
      std::vector<double> c;
      std::vector<int> ids;
      for (const auto& a : active) {
        c.push_back(a.cumulative);
        ids.push_back(a.seed_id);
      }
      Candidate winner = std::move(active[final_prune(c, ids)]);
      active.clear();
      active.push_back(std::move(winner));
    }
    for (const auto& a : active) rec.survivors.push_back(a.seed_id);
    trace.scoring.push_back(std::move(rec));
    clock.charge(trace.times.reward);
  }

  Video video = decode(active[0].latent, pipeline.decoder);
  ++trace.counts.decodes;
  trace.winner = active[0].seed_id;
  clock.charge(trace.times.decoder);

  finish_counts(trace, counters, pipeline);
  clock.charge(trace.times.denoiser);  // count audit
  trace.times.total = clock.total();
  return {std::move(video), std::move(active[0].latent), std::move(trace)};
}

SearchResult best_of_n(const Latent& base, const Condition& cond, const SearchConfig& config,
                       const Pipeline& pipeline, const LatentJudge& judge) {
  PhaseClock clock;
  const int T = pipeline.steps();
  if (config.candidates < 1) throw std::invalid_argument("search: candidates must be >= 1");
  if (std::abs(config.reward_weights.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("search: reward weights must sum to 1");
  SearchTrace trace = make_trace(SearchMethod::best_of_n, config, cond, base);
  std::vector<EvalCounter> counters(static_cast<std::size_t>(config.candidates));

  std::vector<Candidate> all = init_candidates(base, config.candidates, config.eta, config.seed);
  for (int j = 1; j <= T; ++j) {
    advance(all, T - j + 1, cond, pipeline, counters, config.workers);
    trace.counts.step_units += static_cast<std::int64_t>(all.size());
  }
  clock.charge(trace.times.denoiser);

  std::vector<Video> videos;
  for (const auto& c : all) videos.push_back(decode(c.latent, pipeline.decoder));
  trace.counts.decodes += static_cast<std::int64_t>(all.size());
  clock.charge(trace.times.decoder);

  std::size_t best = 0;
  double best_score = 0.0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const RewardVector r = config.judge == SelectionJudge::oracle ? pipeline.judge(videos[i], cond)
                                                                   : judge(all[i].latent, cond, 0);
    ++trace.counts.reward_evals;
    trace.final_scores.push_back(r);
    const double s = composite_reward(r, config.reward_weights);
    if (!std::isfinite(s))
      throw SearchAborted("search aborted: non-finite final score for seed " + std::to_string(all[i].seed_id), trace);
    if (i == 0 || s > best_score) {
      best = i;
      best_score = s;
    }
  }
  trace.winner = all[best].seed_id;
  clock.charge(trace.times.reward);

  finish_counts(trace, counters, pipeline);
  clock.charge(trace.times.denoiser);  // count audit
  trace.times.total = clock.total();
  return {std::move(videos[best]), std::move(all[best].latent), std::move(trace)};
}

SearchResult beam_search(const Latent& base, const Condition& cond, const SearchConfig& config,
                         const Pipeline& pipeline, const LatentJudge& judge) {
  PhaseClock clock;
  const int T = pipeline.steps();
  config.validate(T);
  if (config.beam_width > config.candidates)
    throw std::invalid_argument("search: beam_width must lie in [1, candidates]");
  SearchTrace trace = make_trace(SearchMethod::beam, config, cond, base);
  std::vector<EvalCounter> counters(static_cast<std::size_t>(config.candidates));
  const std::set<int> scoring(config.schedule.begin(), config.schedule.end());
  const int last = config.schedule.back();

  std::vector<Candidate> active = init_candidates(base, config.candidates, config.eta, config.seed);
  clock.charge(trace.times.denoiser);

  for (int j = 1; j <= T; ++j) {
    advance(active, T - j + 1, cond, pipeline, counters, config.workers);
    trace.counts.step_units += static_cast<std::int64_t>(active.size());
    clock.charge(trace.times.denoiser);
    if (!scoring.count(j)) continue;

    ScoringRecord rec = score_active(active, j, T - j, cond, judge, config.reward_weights, trace);
    for (std::size_t i = 0; i < active.size(); ++i) {
      active[i].cumulative += rec.composite[i];
      rec.cumulative.push_back(active[i].cumulative);
    }
    const std::size_t keep = j == last ? 1 : std::min<std::size_t>(static_cast<std::size_t>(config.beam_width), active.size());
    std::stable_sort(active.begin(), active.end(), [](const Candidate& a, const Candidate& b) {
      if (a.cumulative != b.cumulative) return a.cumulative > b.cumulative;
      return a.seed_id < b.seed_id;
    });
    active.resize(keep);
    std::sort(active.begin(), active.end(), [](const Candidate& a, const Candidate& b) { return a.seed_id < b.seed_id; });
    for (const auto& a : active) rec.survivors.push_back(a.seed_id);
    trace.scoring.push_back(std::move(rec));
    clock.charge(trace.times.reward);
  }

  Video video = decode(active[0].latent, pipeline.decoder);
  ++trace.counts.decodes;
  trace.winner = active[0].seed_id;
  clock.charge(trace.times.decoder);

  finish_counts(trace, counters, pipeline);
  clock.charge(trace.times.denoiser);  // count audit
  trace.times.total = clock.total();
  return {std::move(video), std::move(active[0].latent), std::move(trace)};
}

SearchResult run_search(SearchMethod method, const Latent& base, const Condition& cond,
                        const SearchConfig& config, const Pipeline& pipeline, const LatentJudge& judge) {
  switch (method) {
    case SearchMethod::vanilla: return vanilla(base, cond, pipeline);
    case SearchMethod::latsearch: return latsearch(base, cond, config, pipeline, judge);
    case SearchMethod::best_of_n: return best_of_n(base, cond, config, pipeline, judge);
    case SearchMethod::beam: return beam_search(base, cond, config, pipeline, judge);
  }
  throw std::logic_error("run_search: unknown method");
}

namespace {

nlohmann::json latent_json(const Latent& z) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index f = 0; f < z.rows(); ++f) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index d = 0; d < z.cols(); ++d) row.push_back(z(f, d));
    rows.push_back(std::move(row));
  }
  return rows;
}

Latent latent_from(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? 0 : static_cast<Eigen::Index>(j.at(0).size());
  Latent z(rows, cols);
  for (Eigen::Index f = 0; f < rows; ++f) {
    if (static_cast<Eigen::Index>(j.at(f).size()) != cols) throw std::invalid_argument("trace: ragged latent");
    for (Eigen::Index d = 0; d < cols; ++d) z(f, d) = j.at(f).at(d).get<double>();
  }
  return z;
}

nlohmann::json reward_json(const RewardVector& r) { return {r.vq, r.mq, r.ta}; }
RewardVector reward_from(const nlohmann::json& j) { return {j.at(0), j.at(1), j.at(2)}; }

}  // namespace

nlohmann::json to_json(const SearchTrace& t) {
  nlohmann::json j;
  j["schema"] = kTraceSchema;
  j["method"] = to_string(t.method);
  j["candidates"] = t.candidates;
  j["eta"] = t.eta;
  j["temperature"] = t.temperature;
  j["beam_width"] = t.beam_width;
  j["schedule"] = t.schedule;
  j["seed"] = t.seed;
  j["reward_weights"] = {t.reward_weights(0), t.reward_weights(1), t.reward_weights(2)};
  j["selection"] = to_string(t.selection);
  j["cond"] = t.cond.is_null() ? nlohmann::json(nullptr) : nlohmann::json(t.cond.index());
  j["base"] = latent_json(t.base);
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& r : t.scoring) {
    nlohmann::json s;
    s["step"] = r.step;
    s["timestep"] = r.timestep;
    s["seed_ids"] = r.seed_ids;
    s["rewards"] = nlohmann::json::array();
    for (const auto& v : r.rewards) s["rewards"].push_back(reward_json(v));
    s["composite"] = r.composite;
    s["weights"] = r.weights;
    s["multiplicities"] = r.multiplicities;
    s["cumulative"] = r.cumulative;
    s["survivors"] = r.survivors;
    steps.push_back(std::move(s));
  }
  j["scoring"] = std::move(steps);
  j["winner"] = t.winner;
  j["final_scores"] = nlohmann::json::array();
  for (const auto& v : t.final_scores) j["final_scores"].push_back(reward_json(v));
  j["counts"] = {{"step_units", t.counts.step_units},
                 {"drift_calls", t.counts.drift_calls},
                 {"eps_evals", t.counts.eps_evals},
                 {"reward_evals", t.counts.reward_evals},
                 {"decodes", t.counts.decodes}};
  j["timing"] = {{"denoiser_s", t.times.denoiser},
                 {"decoder_s", t.times.decoder},
                 {"reward_s", t.times.reward},
                 {"total_s", t.times.total}};
  return j;
}

SearchTrace trace_from_json(const nlohmann::json& j) {
  if (j.value("schema", std::string()) != kTraceSchema)
    throw std::invalid_argument("trace: schema must be " + std::string(kTraceSchema));
  SearchTrace t;
  t.method = parse_search_method(j.at("method"));
  t.candidates = j.at("candidates");
  t.eta = j.at("eta");
  t.temperature = j.at("temperature");
  t.beam_width = j.at("beam_width");
  t.schedule = j.at("schedule").get<std::vector<int>>();
  t.seed = j.at("seed");
  const auto w = j.at("reward_weights").get<std::vector<double>>();
  if (w.size() != 3) throw std::invalid_argument("trace: reward_weights must have 3 entries");
  t.reward_weights = Eigen::Vector3d(w[0], w[1], w[2]);
  t.selection = parse_selection_judge(j.at("selection"));
  t.cond = j.at("cond").is_null() ? Condition::null() : Condition::prompt(j.at("cond").get<int>());
  t.base = latent_from(j.at("base"));
  for (const auto& s : j.at("scoring")) {
    ScoringRecord r;
    r.step = s.at("step");
    r.timestep = s.at("timestep");
    r.seed_ids = s.at("seed_ids").get<std::vector<int>>();
    for (const auto& v : s.at("rewards")) r.rewards.push_back(reward_from(v));
    r.composite = s.at("composite").get<std::vector<double>>();
    r.weights = s.at("weights").get<std::vector<double>>();
    r.multiplicities = s.at("multiplicities").get<std::vector<int>>();
    r.cumulative = s.at("cumulative").get<std::vector<double>>();
    r.survivors = s.at("survivors").get<std::vector<int>>();
    t.scoring.push_back(std::move(r));
  }
  t.winner = j.at("winner");
  for (const auto& v : j.at("final_scores")) t.final_scores.push_back(reward_from(v));
  const auto& c = j.at("counts");
  t.counts = {c.at("step_units"), c.at("drift_calls"), c.at("eps_evals"), c.at("reward_evals"), c.at("decodes")};
  if (j.contains("timing")) {
    const auto& tm = j.at("timing");
    t.times = {tm.at("denoiser_s"), tm.at("decoder_s"), tm.at("reward_s"), tm.at("total_s")};
  }
  return t;
}

SearchConfig config_from_trace(const SearchTrace& t) {
  SearchConfig cfg;
  cfg.candidates = t.candidates;
  cfg.eta = t.eta;
  cfg.temperature = t.temperature;
  cfg.schedule = t.schedule;
  cfg.seed = t.seed;
  cfg.reward_weights = t.reward_weights;
  cfg.judge = t.selection;
  cfg.beam_width = t.beam_width > 0 ? t.beam_width : std::max(1, std::min(cfg.beam_width, cfg.candidates));
  return cfg;
}

SearchResult replay(const SearchTrace& trace, const Pipeline& pipeline, const LatentJudge& judge) {
  SearchResult again = run_search(trace.method, trace.base, trace.cond, config_from_trace(trace), pipeline, judge);
  const SearchTrace& r = again.trace;
  if (r.scoring.size() != trace.scoring.size())
    throw std::runtime_error("replay: scoring step count differs");
  for (std::size_t i = 0; i < r.scoring.size(); ++i) {
    const auto& a = trace.scoring[i];
    const auto& b = r.scoring[i];
    const std::string where = " at scoring step " + std::to_string(a.step);
    if (a.step != b.step || a.seed_ids != b.seed_ids) throw std::runtime_error("replay: active set differs" + where);
    if (a.multiplicities != b.multiplicities) throw std::runtime_error("replay: multiplicities differ" + where);
    if (a.survivors != b.survivors) throw std::runtime_error("replay: survivors differ" + where);
  }
  if (r.winner != trace.winner) throw std::runtime_error("replay: winner differs");
  const auto& x = trace.counts;
  const auto& y = r.counts;
  if (x.step_units != y.step_units || x.eps_evals != y.eps_evals || x.reward_evals != y.reward_evals ||
      x.decodes != y.decodes)
    throw std::runtime_error("replay: evaluation counts differ");
  return again;
}

}  // namespace latsearch
