// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "latsearch/oracle.hpp"
#include "latsearch/pipeline.hpp"
#include "latsearch/reward_model.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace latsearch {

enum class SearchMethod { vanilla, latsearch, best_of_n, beam };

SearchMethod parse_search_method(const std::string& name);
std::string to_string(SearchMethod method);

// Judge used by best_of_n to pick among finished candidates.
enum class SelectionJudge { oracle, reward_model };

SelectionJudge parse_selection_judge(const std::string& name);
std::string to_string(SelectionJudge judge);

struct SearchConfig {
  int candidates = 6;
  double eta = 0.8;
  double temperature = 1.0;
  std::vector<int> schedule;  // denoising step indices j in [1, T - 1], ascending
  Eigen::Vector3d reward_weights = Eigen::Vector3d::Constant(1.0 / 3.0);
  std::uint64_t seed = 0;
  int beam_width = 2;
  SelectionJudge judge = SelectionJudge::reward_model;
  int workers = 1;

  void validate(int steps) const;
};

// Maps step indices given against `reference_steps` proportionally onto `steps`
// (rounded to nearest, duplicates dropped). {10, 15, 20} of 50 -> {6, 10, 13} of 32.
std::vector<int> rescale_schedule(std::span<const int> reference, int reference_steps, int steps);

// Step indices {10, 15, 20} of 50 rescaled to `steps`.
std::vector<int> default_schedule(int steps);

struct Candidate {
  Latent latent;
  int seed_id = 0;
  double cumulative = 0.0;
};

// z^(0) = base; z^(i) = sqrt(1 - eta^2) base + eta eps_i for i >= 1 with eps_i drawn from
// the stream ("search.init", i) of `seed`.
std::vector<Candidate> init_candidates(const Latent& base, int n, double eta, std::uint64_t seed);

double composite_reward(const RewardVector& r, const Eigen::Vector3d& weights);

// exp(tau r_i) / sum_k exp(tau r_k), shifted by max(r) before exponentiation.
std::vector<double> softmax_weights(std::span<const double> rewards, double tau);

struct Resample {
  std::vector<int> multiplicities;  // n_i, sums to draws
  std::vector<int> survivors;       // indices with n_i > 0, ascending
};

// n ~ Multinomial(draws; weights), survivors = supp(n).
Resample resample_unique(std::span<const double> weights, int draws, RngStream& rng);

inline double survival_probability(double pi, int n) { return 1.0 - std::pow(1.0 - pi, n); }
inline double accumulate(double c_prev, double pi) { return c_prev + pi; }

// argmax of `cumulative`; ties go to the lowest seed id.
std::size_t final_prune(std::span<const double> cumulative, std::span<const int> seed_ids);

// Scores an intermediate latent at diffusion timestep t.
using LatentJudge = std::function<RewardVector(const Latent& z, const Condition& cond, int t)>;

// Network scores clamped to [0, 1].
LatentJudge reward_model_judge(const RewardNet& net);

struct ScoringRecord {
  int step = 0;               // denoising step index j
  int timestep = 0;           // timestep of the scored latent, also passed to the judge
  std::vector<int> seed_ids;  // active before scoring
  std::vector<RewardVector> rewards;
  std::vector<double> composite;
  std::vector<double> weights;         // latsearch only
  std::vector<int> multiplicities;     // latsearch only
  std::vector<double> cumulative;      // after accumulation, aligned with seed_ids
  std::vector<int> survivors;          // seed ids still active after the step
};

struct SearchCounts {
  std::int64_t step_units = 0;  // candidate sampler steps
  std::int64_t drift_calls = 0;
  std::int64_t eps_evals = 0;
  std::int64_t reward_evals = 0;
  std::int64_t decodes = 0;
};

// Wall seconds from a monotonic clock. total is measured around the whole run
// independently of the phase clocks.
struct PhaseTimes {
  double denoiser = 0.0;
  double decoder = 0.0;
  double reward = 0.0;
  double total = 0.0;

  double phase_sum() const { return denoiser + decoder + reward; }
};

inline constexpr const char* kTraceSchema = "latsearch.search_trace/1";

struct SearchTrace {
  SearchMethod method = SearchMethod::vanilla;
  int candidates = 1;
  double eta = 0.0;
  double temperature = 1.0;
  int beam_width = 0;
  std::vector<int> schedule;
  std::uint64_t seed = 0;
  Eigen::Vector3d reward_weights = Eigen::Vector3d::Constant(1.0 / 3.0);
  SelectionJudge selection = SelectionJudge::reward_model;
  Condition cond;
  Latent base;
  std::vector<ScoringRecord> scoring;
  int winner = 0;                          // seed id of the decoded candidate
  std::vector<RewardVector> final_scores;  // best_of_n judge scores per candidate
  SearchCounts counts;
  PhaseTimes times;
};

// Timing lives under "timing"; everything else is deterministic.
nlohmann::json to_json(const SearchTrace& trace);
SearchTrace trace_from_json(const nlohmann::json& j);

struct SearchResult {
  Video video;
  Latent z0;
  SearchTrace trace;
};

class SearchAborted : public std::runtime_error {
 public:
  SearchAborted(const std::string& what, SearchTrace partial)
      : std::runtime_error(what), trace(std::move(partial)) {}
  SearchTrace trace;
};

SearchResult vanilla(const Latent& base, const Condition& cond, const Pipeline& pipeline);

SearchResult latsearch(const Latent& base, const Condition& cond, const SearchConfig& config,
                       const Pipeline& pipeline, const LatentJudge& judge);

// The selecting judge is `judge` at t = 0 when config.judge is reward_model, the oracle
// otherwise.
SearchResult best_of_n(const Latent& base, const Condition& cond, const SearchConfig& config,
                       const Pipeline& pipeline, const LatentJudge& judge);

SearchResult beam_search(const Latent& base, const Condition& cond, const SearchConfig& config,
                         const Pipeline& pipeline, const LatentJudge& judge);

SearchResult run_search(SearchMethod method, const Latent& base, const Condition& cond,
                        const SearchConfig& config, const Pipeline& pipeline, const LatentJudge& judge);

// Config that reproduces the run recorded in `trace`.
SearchConfig config_from_trace(const SearchTrace& trace);

// Reruns the trace's method from its recorded base noise, seed and settings; throws
// std::runtime_error naming the first decision that differs.
SearchResult replay(const SearchTrace& trace, const Pipeline& pipeline, const LatentJudge& judge);

}  // namespace latsearch
