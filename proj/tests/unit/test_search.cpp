// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "latsearch/search.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace latsearch;

namespace {

const Pipeline& pipeline() {
  static const Pipeline p = [] {
    const MixtureTarget target = MixtureTarget::standard(4, 4, 4);
    RngStream rng(1, "test.search.calibration");
    OracleCalibration calib = calibrate(target, 2000, rng);
    return Pipeline{target, make_schedule(32, ScheduleKind::cosine), SamplerMethod::heun2, 5.0,
                    LinearDecoder::identity(4), calib};
  }();
  return p;
}

// Smooth deterministic judge; depends on every entry of z.
RewardVector toy_judge(const Latent& z, const Condition&, int t) {
  const double a = std::tanh(z.sum() / 8.0), b = std::tanh(z(0, 0) - z(3, 3));
  return {0.5 + 0.5 * a, 0.5 + 0.25 * b, 1.0 / (1.0 + 0.1 * t + z.squaredNorm() / 16.0)};
}

RewardVector flat_judge(const Latent&, const Condition&, int) { return {0.5, 0.5, 0.5}; }

SearchConfig config(int n, std::uint64_t seed) {
  SearchConfig c;
  c.candidates = n;
  c.schedule = default_schedule(32);
  c.seed = seed;
  return c;
}

Latent base_noise(std::uint64_t i) {
  RngStream rng(99, "test.search.base", i);
  return rng.normal_latent(4, 4);
}

}  // namespace

TEST_CASE("init_candidates: base first, seeded perturbations") {
  const Latent base = base_noise(0);
  const auto c = init_candidates(base, 4, 0.6, 3);
  REQUIRE(c.size() == 4);
  CHECK((c[0].latent.array() == base.array()).all());
  for (int i = 0; i < 4; ++i) {
    CHECK(c[static_cast<std::size_t>(i)].seed_id == i);
    CHECK(c[static_cast<std::size_t>(i)].cumulative == 0.0);
  }
  RngStream rng(3, "search.init", 2);
  const Latent expect = 0.8 * base + 0.6 * rng.normal_latent(4, 4);
  CHECK((c[2].latent - expect).cwiseAbs().maxCoeff() < 1e-15);
  const auto same = init_candidates(base, 4, 0.0, 3);
  for (const auto& x : same) CHECK((x.latent.array() == base.array()).all());
  CHECK(init_candidates(base, 1, 0.8, 3).size() == 1);
  CHECK_THROWS_AS(init_candidates(base, 0, 0.8, 3), std::invalid_argument);
  CHECK_THROWS_AS(init_candidates(base, 2, 1.2, 3), std::invalid_argument);
}

TEST_CASE("softmax_weights: examples") {
  const std::vector<double> r{0.3, 0.6, 0.9};
  const auto w = softmax_weights(r, 2.0);
  CHECK(w[0] == doctest::Approx(0.16280716746749876).epsilon(1e-14));
  CHECK(w[1] == doctest::Approx(0.29665400068085553).epsilon(1e-14));
  CHECK(w[2] == doctest::Approx(0.54053883185164571).epsilon(1e-14));
  CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<double> eq{0.4, 0.4, 0.4, 0.4};
  for (double x : softmax_weights(eq, 7.0)) CHECK(x == 0.25);
  const std::vector<double> huge{1000.0, 999.0};
  const auto h = softmax_weights(huge, 1.0);
  CHECK(std::isfinite(h[0]));
  CHECK(h[0] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
  // Adding a constant leaves the weights unchanged.
  std::vector<double> shifted = r;
  for (double& x : shifted) x += 5.0;
  const auto ws = softmax_weights(shifted, 2.0);
  for (std::size_t i = 0; i < 3; ++i) CHECK(ws[i] == doctest::Approx(w[i]).epsilon(1e-13));
  CHECK_THROWS_AS(softmax_weights(r, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(softmax_weights({}, 1.0), std::invalid_argument);
}

TEST_CASE("resample_unique: single draw, degenerate weights, survival") {
  RngStream rng(4, "test.resample");
  const std::vector<double> w{0.2, 0.3, 0.5};
  for (int i = 0; i < 50; ++i) {
    const Resample r = resample_unique(w, 1, rng);
    CHECK(r.survivors.size() == 1);
    CHECK(std::accumulate(r.multiplicities.begin(), r.multiplicities.end(), 0) == 1);
  }
  const std::vector<double> point{0.0, 1.0, 0.0};
  const Resample p = resample_unique(point, 6, rng);
  CHECK(p.multiplicities == std::vector<int>{0, 6, 0});
  CHECK(p.survivors == std::vector<int>{1});
  CHECK(survival_probability(1.0 / 6.0, 6) == doctest::Approx(0.66510202331961591).epsilon(1e-14));
  CHECK(survival_probability(0.0, 6) == 0.0);
  CHECK(survival_probability(1.0, 3) == 1.0);
  CHECK(accumulate(0.25, 0.5) == 0.75);
  CHECK_THROWS_AS(resample_unique(w, 0, rng), std::invalid_argument);
}

TEST_CASE("final_prune: argmax with ties to lowest seed id") {
  const std::vector<double> c{0.4, 0.9, 0.9, 0.1};
  CHECK(final_prune(c, std::vector<int>{0, 3, 2, 5}) == 2);
  CHECK(final_prune(c, std::vector<int>{0, 1, 2, 3}) == 1);
  const std::vector<double> one{0.0};
  CHECK(final_prune(one, std::vector<int>{4}) == 0);
  CHECK_THROWS_AS(final_prune({}, {}), std::logic_error);
}

TEST_CASE("schedules: default and rescaling") {
  CHECK(default_schedule(32) == std::vector<int>{6, 10, 13});
  CHECK(default_schedule(50) == std::vector<int>{10, 15, 20});
  const std::vector<int> ref{1, 2};
  CHECK(rescale_schedule(ref, 50, 4) == std::vector<int>{1});
  SearchConfig c = config(6, 0);
  c.schedule.clear();
  CHECK_THROWS_AS(c.validate(32), std::invalid_argument);
  c.schedule = {10, 6};
  CHECK_THROWS_AS(c.validate(32), std::invalid_argument);
  c.schedule = {0, 6};
  CHECK_THROWS_AS(c.validate(32), std::invalid_argument);
  c.schedule = {6, 32};
  CHECK_THROWS_AS(c.validate(32), std::invalid_argument);
}

TEST_CASE("latsearch: trace invariants") {
  for (std::uint64_t rep = 0; rep < 6; ++rep) {
    const SearchConfig cfg = config(6, rep);
    const SearchResult r = latsearch::latsearch(base_noise(rep), Condition::prompt(static_cast<int>(rep % 4)), cfg,
                                                pipeline(), toy_judge);
    const SearchTrace& t = r.trace;
    REQUIRE(t.scoring.size() == 3);
    std::int64_t scored = 0;
    std::map<int, double> last_c;
    for (std::size_t s = 0; s < t.scoring.size(); ++s) {
      const ScoringRecord& rec = t.scoring[s];
      CHECK(rec.step == cfg.schedule[s]);
      CHECK(rec.timestep == 32 - rec.step);
      CHECK(std::accumulate(rec.weights.begin(), rec.weights.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::accumulate(rec.multiplicities.begin(), rec.multiplicities.end(), 0) ==
            static_cast<int>(rec.seed_ids.size()));
      for (std::size_t i = 0; i < rec.seed_ids.size(); ++i) {
        const int id = rec.seed_ids[i];
        CHECK(rec.cumulative[i] >= last_c[id]);
        CHECK(rec.cumulative[i] == doctest::Approx(last_c[id] + rec.weights[i]));
        last_c[id] = rec.cumulative[i];
      }
      scored += static_cast<std::int64_t>(rec.seed_ids.size());
      if (s + 1 < t.scoring.size()) CHECK(t.scoring[s + 1].seed_ids == rec.survivors);
    }
    CHECK(t.scoring.back().survivors.size() == 1);
    CHECK(t.winner == t.scoring.back().survivors[0]);
    CHECK(t.counts.reward_evals == scored);
    CHECK(t.counts.decodes == 1);
    CHECK(t.counts.step_units <= 6 * 13 + (32 - 13));
    CHECK(t.counts.step_units >= 32);
    CHECK(t.counts.eps_evals == t.counts.step_units * 4);
    CHECK(r.video.frames == r.z0);
  }
}

TEST_CASE("latsearch: a single candidate reproduces vanilla") {
  const Latent base = base_noise(7);
  const SearchResult v = vanilla(base, Condition::prompt(1), pipeline());
  const SearchResult l = latsearch::latsearch(base, Condition::prompt(1), config(1, 5), pipeline(), toy_judge);
  CHECK((v.z0.array() == l.z0.array()).all());
  CHECK(v.trace.counts.step_units == 32);
  CHECK(v.trace.counts.eps_evals == 128);
  CHECK(l.trace.counts.step_units == 32);
}

TEST_CASE("latsearch: equal rewards give uniform weights") {
  const SearchResult r = latsearch::latsearch(base_noise(1), Condition::prompt(0), config(6, 2), pipeline(), flat_judge);
  for (const auto& rec : r.trace.scoring)
    for (double w : rec.weights) CHECK(w == doctest::Approx(1.0 / static_cast<double>(rec.seed_ids.size())));
}

TEST_CASE("best_of_n: counts and choice") {
  const SearchResult one = best_of_n(base_noise(2), Condition::prompt(2), config(1, 0), pipeline(), toy_judge);
  CHECK(one.trace.winner == 0);
  CHECK((one.z0.array() == vanilla(base_noise(2), Condition::prompt(2), pipeline()).z0.array()).all());
  const SearchResult r = best_of_n(base_noise(2), Condition::prompt(2), config(5, 0), pipeline(), toy_judge);
  CHECK(r.trace.counts.step_units == 5 * 32);
  CHECK(r.trace.counts.decodes == 5);
  CHECK(r.trace.counts.reward_evals == 5);
  const Eigen::Vector3d w = Eigen::Vector3d::Constant(1.0 / 3.0);
  double best = -1.0;
  for (const auto& s : r.trace.final_scores) best = std::max(best, composite_reward(s, w));
  CHECK(composite_reward(r.trace.final_scores[static_cast<std::size_t>(r.trace.winner)], w) == best);
}

TEST_CASE("beam: widths and ties") {
  SearchConfig cfg = config(6, 3);
  cfg.beam_width = 6;
  const SearchResult full = beam_search(base_noise(3), Condition::prompt(3), cfg, pipeline(), flat_judge);
  CHECK(full.trace.scoring[0].survivors.size() == 6);
  CHECK(full.trace.winner == 0);  // all tied at every step

  cfg.beam_width = 2;
  const SearchResult tie = beam_search(base_noise(3), Condition::prompt(3), cfg, pipeline(), flat_judge);
  CHECK(tie.trace.scoring[0].survivors == std::vector<int>{0, 1});
  CHECK(tie.trace.counts.step_units == 6 * 6 + 2 * 7 + 1 * (32 - 13));

  cfg.beam_width = 1;
  const SearchResult greedy = beam_search(base_noise(3), Condition::prompt(3), cfg, pipeline(), toy_judge);
  const ScoringRecord& first = greedy.trace.scoring[0];
  const auto top = std::max_element(first.composite.begin(), first.composite.end()) - first.composite.begin();
  CHECK(first.survivors == std::vector<int>{first.seed_ids[static_cast<std::size_t>(top)]});

  cfg.beam_width = 7;
  CHECK_THROWS_AS(beam_search(base_noise(3), Condition::prompt(3), cfg, pipeline(), toy_judge), std::invalid_argument);
}

TEST_CASE("trace: JSON round trip and replay") {
  const SearchResult r = latsearch::latsearch(base_noise(4), Condition::prompt(2), config(6, 11), pipeline(), toy_judge);
  const nlohmann::json j = to_json(r.trace);
  CHECK(j.contains("timing"));
  const SearchTrace back = trace_from_json(j);
  CHECK(to_json(back).dump() == j.dump());
  CHECK((back.base.array() == r.trace.base.array()).all());

  const SearchResult again = replay(back, pipeline(), toy_judge);
  CHECK((again.z0.array() == r.z0.array()).all());

  SearchTrace tampered = back;
  tampered.winner = (tampered.winner + 1) % 6;
  CHECK_THROWS_AS(replay(tampered, pipeline(), toy_judge), std::runtime_error);

  nlohmann::json bad = j;
  bad["schema"] = "other";
  CHECK_THROWS_AS(trace_from_json(bad), std::invalid_argument);
}

TEST_CASE("search: deterministic across worker counts") {
  SearchConfig cfg = config(6, 21);
  const SearchResult a = latsearch::latsearch(base_noise(5), Condition::prompt(0), cfg, pipeline(), toy_judge);
  cfg.workers = 3;
  const SearchResult b = latsearch::latsearch(base_noise(5), Condition::prompt(0), cfg, pipeline(), toy_judge);
  CHECK((a.z0.array() == b.z0.array()).all());
  CHECK(to_json(a.trace)["scoring"].dump() == to_json(b.trace)["scoring"].dump());
}

TEST_CASE("parse helpers") {
  CHECK(parse_search_method("beam") == SearchMethod::beam);
  CHECK(to_string(SearchMethod::best_of_n) == "best_of_n");
  CHECK_THROWS_AS(parse_search_method("greedy"), std::invalid_argument);
  CHECK(parse_selection_judge("oracle") == SelectionJudge::oracle);
}
