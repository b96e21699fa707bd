// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance run: one PASS/FAIL line per criterion. Exit status is non-zero when any hard
// criterion fails; soft criteria are reported only.

#include "latsearch/bench.hpp"
#include "latsearch/config.hpp"
#include "latsearch/credit.hpp"
#include "latsearch/reward_model.hpp"
#include "latsearch/search.hpp"
#include "latsearch/stats.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace fs = std::filesystem;
using namespace latsearch;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  bool soft;
  std::function<Verdict()> run;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string g(double v) { return fmt("%.4g", v); }

// ---- 1: exact identities -------------------------------------------------------------

Verdict math_identities() {
  bool ok = true;
  std::ostringstream why;
  const std::vector<double> r{0.1, 0.7, -2.0, 3.5, 0.0, 1e3};
  double sum = 0.0;
  for (double w : softmax_weights(r, 1.7)) sum += w;
  if (std::abs(sum - 1.0) > 1e-12) ok = false, why << "softmax sum " << sum << "; ";
  if (std::abs(pair_loss(0.0, true) - std::log(2.0)) > 1e-12 || std::abs(pair_loss(0.0, false) - std::log(2.0)) > 1e-12)
    ok = false, why << "pair loss at 0; ";
  const Eigen::Vector3d p(0.3, -1.2, 7.0);
  if (regression_loss(p, p) != Eigen::Vector3d::Zero()) ok = false, why << "regression loss; ";
  if (survival_probability(0.5, 2) != 0.75) ok = false, why << "survival; ";
  Latent z(2, 3), o(2, 3);
  z << 1, 2, 3, -1, 0.5, 2;
  o << 2, -1, 0, 0, 0, 0;
  if (cosine_credit(z, z) != 1.0) ok = false, why << "cos(z,z)=" << cosine_credit(z, z) << "; ";
  if (cosine_credit(z, Latent(-z)) != 0.0) ok = false, why << "cos(z,-z); ";
  if (cosine_credit(z, o) != 0.5) ok = false, why << "cos orthogonal; ";
  return {ok, ok ? "softmax, ln 2, zero regression, 0.75, credits 1/0/0.5 exact" : why.str()};
}

// ---- 2: gradient oracle ----------------------------------------------------------------

Verdict gradient_oracle() {
  const double h = 1e-6;
  double worst = 0.0;
  std::size_t checked = 0;
  for (int draw = 0; draw < 20; ++draw) {
    RngStream rng(2026, "accept.grad", draw);
    RewardNetShape shape;
    RewardNet net = RewardNet::initialized(shape, rng);
    Eigen::VectorXd theta = net.flatten();
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) += 0.3 * rng.normal();
    net.assign(theta);

    const int batch = 3 + static_cast<int>(rng.below(4));
    std::vector<Latent> latents;
    latents.reserve(batch);
    std::vector<Example> examples;
    for (int b = 0; b < batch; ++b) latents.push_back(rng.normal_latent(shape.frames, shape.dims));
    for (int b = 0; b < batch; ++b) {
      Example e;
      e.z = &latents[b];
      const auto c = rng.below(shape.components + 1);
      e.cond = c == static_cast<std::uint64_t>(shape.components) ? Condition::null() : Condition::prompt(static_cast<int>(c));
      e.t = static_cast<int>(rng.below(shape.steps + 1));
      e.target = Eigen::Vector3d(rng.uniform(), rng.uniform(), rng.uniform());
      e.label = e.target;
      examples.push_back(e);
    }
    TrainConfig cfg;
    cfg.weights.reg = Eigen::Vector3d(rng.uniform() + 0.5, rng.uniform() + 0.5, rng.uniform() + 0.5);
    cfg.weights.pref = Eigen::Vector3d(rng.uniform() + 0.5, rng.uniform() + 0.5, rng.uniform() + 0.5);

    const Eigen::VectorXd analytic = backward(net, examples, cfg).grad.flatten();
    // Entries far below the largest gradient are compared on that scale; central differences
    // at h = 1e-6 carry ~eps |L| / h of roundoff, which swamps them otherwise.
    const double floor = 1e-3 * analytic.cwiseAbs().maxCoeff();
    RewardNet probe = net;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      Eigen::VectorXd tp = theta, tm = theta;
      tp(i) += h;
      tm(i) -= h;
      probe.assign(tp);
      const double lp = batch_loss(probe, examples, cfg).total;
      probe.assign(tm);
      const double lm = batch_loss(probe, examples, cfg).total;
      const double numeric = (lp - lm) / (2.0 * h);
      const double a = analytic(i);
      const double scale = std::max({std::abs(a), std::abs(numeric), floor});
      worst = std::max(worst, std::abs(a - numeric) / scale);
      ++checked;
    }
  }
  return {worst < 1e-5, "max relative error " + g(worst) + " over " + std::to_string(checked) + " parameters"};
}

// ---- 3: score oracle -------------------------------------------------------------------

// log p_t(z | cond), written out directly from the Gaussian density.
double diffused_log_density(const Latent& z, double ab, const Condition& cond, const MixtureTarget& target) {
  const double var = (1.0 - ab) + ab * target.component_std * target.component_std;
  const double n = static_cast<double>(z.size());
  std::vector<double> terms;
  double wsum = 0.0;
  for (int k = 0; k < target.components(); ++k) {
    if (!cond.is_null() && cond.index() != k) continue;
    wsum += target.weights[k];
  }
  for (int k = 0; k < target.components(); ++k) {
    if (!cond.is_null() && cond.index() != k) continue;
    double sq = 0.0;
    for (int f = 0; f < z.rows(); ++f)
      for (int d = 0; d < z.cols(); ++d) {
        const double mean = std::sqrt(ab) * (target.base_means[k](d) + f * target.velocities[k](d));
        sq += (z(f, d) - mean) * (z(f, d) - mean);
      }
    terms.push_back(std::log(target.weights[k] / wsum) - 0.5 * n * std::log(2.0 * std::numbers::pi * var) -
                    sq / (2.0 * var));
  }
  const double m = *std::max_element(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return m + std::log(s);
}

Verdict score_oracle() {
  const MixtureTarget target = MixtureTarget::standard(4, 4, 4);
  const NoiseSchedule sched = make_schedule(32, ScheduleKind::cosine);
  RngStream rng(2026, "accept.score");
  const double h = 1e-5;
  double worst = 0.0;
  for (int probe = 0; probe < 100; ++probe) {
    const int t = 1 + static_cast<int>(rng.below(32));
    const auto c = rng.below(5);
    const Condition cond = c == 4 ? Condition::null() : Condition::prompt(static_cast<int>(c));
    const double ab = sched.alpha_bar(t);
    Latent z = 1.5 * rng.normal_latent(4, 4);
    const Latent score = mixture_score(z, t, cond, target, sched);
    Latent fd(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        Latent zp = z, zm = z;
        zp(i, j) += h;
        zm(i, j) -= h;
        fd(i, j) = (diffused_log_density(zp, ab, cond, target) - diffused_log_density(zm, ab, cond, target)) / (2 * h);
      }
    worst = std::max(worst, (score - fd).norm() / std::max(score.norm(), 1e-12));
  }
  return {worst < 1e-6, "max relative error " + g(worst) + " at 100 probes"};
}

// ---- 4: sampler order ------------------------------------------------------------------

Latent integrate(const Latent& z, double from, double to, int n, const GuidedDrift& f) {
  Latent x = z;
  const double h = (to - from) / n;
  for (int i = 0; i < n; ++i) x = integrate_step(x, from + i * h, from + (i + 1) * h, SamplerMethod::heun2, f);
  return x;
}

Verdict sampler_order() {
  const MixtureTarget target = MixtureTarget::standard(4, 4, 4);
  const NoiseSchedule sched = make_schedule(32, ScheduleKind::cosine);
  // Whole trajectory T -> 0; h = 0.5 and 0.25 keep every knot of the schedule on a step edge.
  const int n = 64;
  double e1 = 0.0, e2 = 0.0, lo = 1e300, hi = 0.0;
  for (int probe = 0; probe < 20; ++probe) {
    RngStream rng(2026, "accept.order", probe);
    const GuidedDrift f(target, sched, Condition::prompt(probe % 4), 5.0);
    const Latent z = rng.normal_latent(4, 4);
    const Latent ref = integrate(z, 32.0, 0.0, 64 * n, f);
    const double a = (integrate(z, 32.0, 0.0, n, f) - ref).norm();
    const double b = (integrate(z, 32.0, 0.0, 2 * n, f) - ref).norm();
    e1 += a;
    e2 += b;
    lo = std::min(lo, a / b);
    hi = std::max(hi, a / b);
  }
  const double ratio = e1 / e2;
  return {ratio >= 3.5 && ratio <= 4.5 && lo >= 3.5 && hi <= 4.5,
          "pooled error ratio " + g(ratio) + " (per start " + g(lo) + ".." + g(hi) + ", h 0.5 -> 0.25, 20 starts)"};
}

// ---- 5: resampling statistics ----------------------------------------------------------

Verdict resampling_statistics() {
  const std::vector<double> pi = softmax_weights(std::vector<double>{0.1, 0.9, 0.4, 0.6, 0.2, 0.75}, 3.0);
  const int n = 6, trials = 10000;
  RngStream rng(2026, "accept.resample");
  std::vector<double> drawn(pi.size(), 0.0), survived(pi.size(), 0.0);
  for (int i = 0; i < trials; ++i) {
    const Resample r = resample_unique(pi, n, rng);
    for (std::size_t k = 0; k < pi.size(); ++k) drawn[k] += r.multiplicities[k];
    for (int s : r.survivors) survived[s] += 1.0;
  }
  std::vector<double> expected(pi.size());
  for (std::size_t k = 0; k < pi.size(); ++k) expected[k] = pi[k] * n * trials;
  const ChiSquareResult chi = chi_square_gof(drawn, expected);
  double worst_sigma = 0.0;
  for (std::size_t k = 0; k < pi.size(); ++k) {
    const double p = survival_probability(pi[k], n);
    const double sigma = std::sqrt(p * (1 - p) / trials);
    worst_sigma = std::max(worst_sigma, std::abs(survived[k] / trials - p) / sigma);
  }
  return {chi.p > 0.001 && worst_sigma <= 3.0,
          "chi-square p " + g(chi.p) + ", worst survival deviation " + g(worst_sigma) + " sigma"};
}

// ---- 6: variance preservation ----------------------------------------------------------

Verdict variance_preservation() {
  bool ok = true;
  std::string detail;
  for (double eta : {0.3, 0.8, 1.0}) {
    RngStream rng(2026, "accept.variance", static_cast<std::uint64_t>(eta * 10));
    double s = 0.0, ss = 0.0;
    std::size_t count = 0;
    for (int draw = 0; draw < 10000; ++draw) {
      const Latent base = rng.normal_latent(4, 4);
      const auto cands = init_candidates(base, 6, eta, derive_seed(2026, "accept.variance.init", draw));
      for (std::size_t i = 1; i < cands.size(); ++i)
        for (Eigen::Index e = 0; e < cands[i].latent.size(); ++e) {
          const double x = cands[i].latent.data()[e];
          s += x;
          ss += x * x;
          ++count;
        }
    }
    const double mean = s / count;
    const double var = ss / count - mean * mean;
    ok = ok && var >= 0.97 && var <= 1.03;
    detail += "eta " + g(eta) + ": " + fmt("%.4f", var) + "  ";
  }
  return {ok, "per-coordinate variance " + detail};
}

// ---- 7: degenerate equivalence ---------------------------------------------------------

Verdict degenerate_equivalence() {
  RunConfig c = resolve(RunConfig{});
  c.calibration_samples = 1000;
  const Pipeline p = make_pipeline(c);
  RngStream rng(2026, "accept.degenerate");
  RewardNet net = RewardNet::initialized(make_shape(c), rng);
  SearchConfig s = c.search;
  s.candidates = 1;
  int identical = 0;
  const int trials = 20;
  for (int i = 0; i < trials; ++i) {
    const Latent base = rng.normal_latent(c.frames, c.dims);
    const Condition cond = Condition::prompt(i % c.components);
    s.seed = derive_seed(2026, "accept.degenerate", i);
    const SearchResult a = latsearch::latsearch(base, cond, s, p, reward_model_judge(net));
    const SearchResult b = vanilla(base, cond, p);
    identical += (a.video.frames.array() == b.video.frames.array()).all() ? 1 : 0;
  }
  return {identical == trials, std::to_string(identical) + "/" + std::to_string(trials) + " videos bit-identical"};
}

// ---- 8, 9, 12, 14: search benchmark ----------------------------------------------------

struct Bench {
  RunConfig config;
  Pipeline pipeline;
  LatentDataset data;
  std::optional<RewardNet> net;
  nlohmann::json lat, bon, beam;
  std::vector<RunRecord> lat_runs, bon_runs;
  int beam_width = 0;
  double seconds = 0.0;
};

Bench& bench() {
  static std::optional<Bench> b;
  if (b) return *b;
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig config = resolve(RunConfig{});
  config.reps = 200;
  Pipeline pipeline = make_pipeline(config);
  b.emplace(Bench{config, std::move(pipeline), {}, std::nullopt, {}, {}, {}, {}, {}, 0, 0.0});
  Bench& x = *b;
  x.data = build_dataset(make_dataset_spec(x.config), x.pipeline);
  x.net = train_reward_model(x.config, x.data).net;
  const LatentJudge judge = reward_model_judge(*x.net);
  SearchConfig s = x.config.search;
  x.lat_runs = run_repetitions(x.config, SearchMethod::latsearch, s, x.pipeline, judge);
  x.lat = metrics_report(x.config, SearchMethod::latsearch, s, x.lat_runs);
  x.bon_runs = run_repetitions(x.config, SearchMethod::best_of_n, s, x.pipeline, judge);
  x.bon = metrics_report(x.config, SearchMethod::best_of_n, s, x.bon_runs);
  s.beam_width = x.beam_width = matched_beam_width(x.lat_runs, s.candidates);
  const auto beam_runs = run_repetitions(x.config, SearchMethod::beam, s, x.pipeline, judge);
  x.beam = metrics_report(x.config, SearchMethod::beam, s, beam_runs);
  x.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return x;
}

double agg(const nlohmann::json& report, const char* key) {
  return report.at("aggregate").at("method").at("composite").at(key).get<double>();
}

Verdict search_lift() {
  const Bench& b = bench();
  const double lat = agg(b.lat, "mean");
  const double van = b.lat.at("aggregate").at("baseline").at("composite").at("mean").get<double>();
  const double p = b.lat.at("test").at("p").get<double>();
  const std::size_t n = b.lat.at("runs").size();
  return {n >= 200 && lat > van && p < 0.01,
          "latsearch " + fmt("%.4f", lat) + " vs vanilla " + fmt("%.4f", van) + ", Wilcoxon p " + g(p) + ", n " +
              std::to_string(n)};
}

Verdict efficiency_accounting() {
  const Bench& b = bench();
  const int n = b.config.search.candidates, steps = b.config.steps;
  const int last = b.config.search.schedule.back();
  const std::int64_t bound = static_cast<std::int64_t>(n) * last + (steps - last);
  const std::int64_t per_unit = drift_evals_per_step(b.pipeline.method) * (b.pipeline.guidance == 0.0 ? 1 : 2);
  bool counts_ok = true;
  std::int64_t lat_eps = 0, bon_eps = 0, worst_units = 0;
  for (const auto& r : b.lat_runs) {
    if (r.failed) continue;
    const auto& c = r.trace.counts;
    worst_units = std::max(worst_units, c.step_units);
    counts_ok = counts_ok && c.step_units <= bound && c.eps_evals == c.step_units * per_unit;
    lat_eps += c.eps_evals;
  }
  for (const auto& r : b.bon_runs) {
    if (r.failed) continue;
    const auto& c = r.trace.counts;
    counts_ok = counts_ok && c.step_units == static_cast<std::int64_t>(n) * steps;
    bon_eps += c.eps_evals;
  }
  counts_ok = counts_ok && lat_eps < bon_eps;
  const double lat_lo = agg(b.lat, "ci_low"), lat_hi = agg(b.lat, "ci_high");
  const double bon_lo = agg(b.bon, "ci_low"), bon_hi = agg(b.bon, "ci_high");
  const bool overlap = lat_hi >= bon_lo && bon_hi >= lat_lo;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < b.lat_runs.size(); ++i) {
    if (b.lat_runs[i].failed || b.bon_runs[i].failed) continue;
    x.push_back(b.lat_runs[i].composite);
    y.push_back(b.bon_runs[i].composite);
  }
  const double p2 = wilcoxon_signed_rank(x, y, Alternative::two_sided).p;
  return {counts_ok && overlap,
          "eps evals " + std::to_string(lat_eps) + " vs " + std::to_string(bon_eps) + ", worst step units " +
              std::to_string(worst_units) + " <= " + std::to_string(bound) + ", CI [" + fmt("%.4f", lat_lo) + ", " +
              fmt("%.4f", lat_hi) + "] vs best_of_n [" + fmt("%.4f", bon_lo) + ", " + fmt("%.4f", bon_hi) +
              "], two-sided p " + g(p2)};
}

Verdict beam_direction() {
  const Bench& b = bench();
  const double lat = agg(b.lat, "mean"), beam = agg(b.beam, "mean"), se = agg(b.beam, "se");
  return {lat >= beam - se, "latsearch " + fmt("%.4f", lat) + " vs beam(k=" + std::to_string(b.beam_width) + ") " +
                                fmt("%.4f", beam) + " - se " + fmt("%.4f", se)};
}

Verdict timing_integrity() {
  const Bench& b = bench();
  bool ok = true;
  std::size_t runs = 0;
  double worst = 0.0;
  auto gap = [](const nlohmann::json& t) {
    const double sum = t.at("denoiser_s").get<double>() + t.at("decoder_s").get<double>() + t.at("reward_s").get<double>();
    return std::abs(sum - t.at("total_s").get<double>()) / t.at("total_s").get<double>();
  };
  for (const auto* r : {&b.lat, &b.bon, &b.beam}) {
    ok = ok && phase_times_consistent(*r) && r->at("timing").at("phase_sum_within_5pct").get<bool>();
    for (const auto& t : r->at("timing").at("runs")) {
      worst = std::max({worst, gap(t), gap(t.at("baseline"))});
      ++runs;
    }
  }
  return {ok, std::to_string(runs) + " runs (plus baselines) across 3 reports, worst phase-sum gap " +
                  fmt("%.3f%%", 100.0 * worst)};
}

// ---- 10, 11: reward model training directions ------------------------------------------

std::vector<double> accuracy_by_timestep(const std::vector<AccuracyCell>& cells, const std::vector<int>& timesteps) {
  std::vector<double> out;
  for (int t : timesteps) {
    double s = 0.0;
    int n = 0;
    for (const auto& c : cells)
      if (c.t == t && c.accuracy) s += *c.accuracy, ++n;
    out.push_back(n ? s / n : std::nan(""));
  }
  return out;
}

Verdict preference_direction() {
  RunConfig c = resolve(RunConfig{});
  const Pipeline p = make_pipeline(c);
  const LatentDataset data = build_dataset(make_dataset_spec(c), p);
  RunConfig reg_only = c;
  reg_only.train.weights.pref = Eigen::Vector3d::Zero();
  const auto with_pref = accuracy_by_timestep(evaluate_reward_model(c, train_reward_model(c, data).net, data), c.timesteps);
  const auto without = accuracy_by_timestep(
      evaluate_reward_model(reg_only, train_reward_model(reg_only, data).net, data), c.timesteps);
  int wins = 0;
  bool mid_ok = true;
  std::string detail;
  for (std::size_t i = 0; i < c.timesteps.size(); ++i) {
    const int t = c.timesteps[i];
    wins += with_pref[i] >= without[i] ? 1 : 0;
    if (4 * t >= c.steps && 4 * t <= 3 * c.steps) mid_ok = mid_ok && with_pref[i] > 0.55 && without[i] > 0.55;
    detail += " t" + std::to_string(t) + " " + fmt("%.3f", with_pref[i]) + "/" + fmt("%.3f", without[i]);
  }
  return {wins >= 3 && mid_ok, std::to_string(wins) + "/5 timesteps pref >= reg;" + detail};
}

Verdict credit_direction() {
  int wins = 0;
  std::string detail;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    RunConfig c = resolve(RunConfig{});
    c.seed = seed;
    const Pipeline p = make_pipeline(c);
    const LatentDataset data = build_dataset(make_dataset_spec(c), p);
    const LatentDataset common = recredit(data, CreditStrategy{CreditKind::cosine, c.credit.decay});
    double acc[2];
    for (int u = 0; u < 2; ++u) {
      const LatentDataset d = recredit(data, CreditStrategy{u ? CreditKind::uniform : CreditKind::cosine, c.credit.decay});
      acc[u] = mean_accuracy(evaluate_reward_model(c, train_reward_model(c, d).net, common));
    }
    wins += acc[0] >= acc[1] ? 1 : 0;
    detail += " seed " + std::to_string(seed) + ": " + fmt("%.3f", acc[0]) + " vs " + fmt("%.3f", acc[1]) + ";";
  }
  return {wins >= 2, "cosine >= uniform on " + std::to_string(wins) + "/3 seeds;" + detail};
}

// ---- 13: reproducibility ---------------------------------------------------------------

std::map<std::string, std::string> run_all_commands(const fs::path& root) {
  RunConfig c = resolve(RunConfig{});
  c.calibration_samples = 1000;
  c.prompts = 8;
  c.seeds_per_prompt = 4;
  c.train.epochs = 3;
  c.train.lr_drop_epoch = 2;
  c.reps = 12;
  c.ablate.budgets = {2, 4};
  c.workers = 2;
  CommandOptions o;
  o.out = root;
  cmd_build_dataset(c, o);
  cmd_train_reward(c, o);
  cmd_eval_reward(c, o);
  for (SearchMethod m : {SearchMethod::vanilla, SearchMethod::latsearch, SearchMethod::best_of_n, SearchMethod::beam}) {
    RunConfig cm = c;
    cm.method = m;
    cmd_search(cm, o);
  }
  for (AblationAxis a : {AblationAxis::credit, AblationAxis::temperature, AblationAxis::schedule, AblationAxis::loss,
                         AblationAxis::budget}) {
    RunConfig ca = c;
    ca.ablate.axis = a;
    cmd_ablate(ca, o);
  }
  CommandOptions op = o;
  op.inputs = {root / "search" / "latsearch" / "report.json"};
  cmd_plot(c, op);
  op.out = root / "plot_accuracy";
  op.inputs = {root / "eval" / "accuracy.json"};
  cmd_plot(c, op);
  op.out = root / "plot_ablate";
  op.inputs = {root / "ablate" / "budget" / "report.json"};
  cmd_plot(c, op);
  return content_hashes(root);
}

Verdict reproducibility() {
  const fs::path tmp = fs::temp_directory_path() / ("latsearch_accept_" + std::to_string(::getpid()));
  fs::remove_all(tmp);
  const auto a = run_all_commands(tmp / "a");
  const auto b = run_all_commands(tmp / "b");
  std::size_t differing = 0;
  std::string first;
  for (const auto& [k, v] : a) {
    auto it = b.find(k);
    if (it == b.end() || it->second != v) {
      ++differing;
      if (first.empty()) first = k;
    }
  }
  differing += b.size() > a.size() ? b.size() - a.size() : 0;
  fs::remove_all(tmp);
  const bool ok = !a.empty() && a.size() == b.size() && differing == 0;
  return {ok, std::to_string(a.size()) + " output files hashed, " + std::to_string(differing) + " differ" +
                  (first.empty() ? "" : " (first: " + first + ")")};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "math identities", 1, false, math_identities},
      {2, "gradient oracle", 30, false, gradient_oracle},
      {3, "score oracle", 5, false, score_oracle},
      {4, "sampler order", 10, false, sampler_order},
      {5, "resampling statistics", 10, false, resampling_statistics},
      {6, "variance preservation", 5, false, variance_preservation},
      {7, "degenerate equivalence", 5, false, degenerate_equivalence},
      {8, "search lift over vanilla", 300, false, search_lift},
      {9, "efficiency accounting vs best_of_n", 600, false, efficiency_accounting},
      {10, "preference loss direction", 600, false, preference_direction},
      {11, "credit strategy direction", 900, false, credit_direction},
      {12, "rgrp vs beam direction", 600, true, beam_direction},
      {13, "reproducibility of command outputs", 600, false, reproducibility},
      {14, "timing breakdown integrity", 600, false, timing_integrity},
  };
  int hard_failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = s <= c.budget_s;
    const bool pass = v.pass && in_budget;
    if (!in_budget) v.detail += "; over time budget";
    if (!pass && !c.soft) ++hard_failures;
    std::printf("%s [%02d] %s: %s (%.2f s)%s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(), v.detail.c_str(), s,
                c.soft ? " [soft, reported]" : "");
    std::fflush(stdout);
  }
  std::printf("%d hard failure(s)\n", hard_failures);
  return hard_failures == 0 ? 0 : 1;
}
