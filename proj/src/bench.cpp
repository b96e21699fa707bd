// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "latsearch/bench.hpp"

#include "latsearch/parallel.hpp"
#include "latsearch/svg.hpp"
#include "latsearch/tensor_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <ostream>
#include <sstream>

namespace latsearch {

using nlohmann::json;
namespace fs = std::filesystem;

fs::path default_output_root() {
  const char* env = std::getenv(kOutputEnv);
  if (env != nullptr && *env != '\0') return env;
  return "latsearch_out";
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvTable::add(std::vector<std::string> row) {
  if (row.size() != columns_.size()) throw std::logic_error("csv: row width differs from header");
  rows_.push_back(std::move(row));
}

std::string CsvTable::field(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string CsvTable::field(std::int64_t v) { return std::to_string(v); }

std::string CsvTable::str() const {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  };
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out += ',';
      out += quote(cells[i]);
    }
    out += "\r\n";
  };
  line(columns_);
  for (const auto& r : rows_) line(r);
  return out;
}

json make_stamp(const RunConfig& config) {
  return {{"config_hash", config_hash(config)}, {"tool_version", kToolVersion}};
}

fs::path CommandOptions::dataset_dir() const { return dataset.value_or(out / "dataset"); }
fs::path CommandOptions::checkpoint_path() const { return checkpoint.value_or(out / "reward" / "checkpoint.ltsr"); }

namespace {

// CSV with the run stamp appended to every row.
class StampedCsv {
 public:
  StampedCsv(std::vector<std::string> columns, const json& stamp)
      : hash_(stamp.at("config_hash")), version_(stamp.at("tool_version")), table_(with_stamp(std::move(columns))) {}
  void add(std::vector<std::string> row) {
    row.push_back(hash_);
    row.push_back(version_);
    table_.add(std::move(row));
  }
  std::string str() const { return table_.str(); }

 private:
  static std::vector<std::string> with_stamp(std::vector<std::string> c) {
    c.push_back("config_hash");
    c.push_back("tool_version");
    return c;
  }
  std::string hash_, version_;
  CsvTable table_;
};

std::string f(double v) { return CsvTable::field(v); }
std::string f(std::int64_t v) { return CsvTable::field(v); }
std::string f(int v) { return CsvTable::field(static_cast<std::int64_t>(v)); }
std::string f(std::size_t v) { return CsvTable::field(static_cast<std::int64_t>(v)); }

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

json summary_json(const Summary& s) {
  return {{"n", s.n}, {"mean", s.mean}, {"std", s.std}, {"se", s.se}, {"ci_low", s.ci_low}, {"ci_high", s.ci_high}};
}

json reward_json(const RewardVector& r) { return {r.vq, r.mq, r.ta}; }

json counts_json(const SearchCounts& c) {
  return {{"step_units", c.step_units},
          {"drift_calls", c.drift_calls},
          {"eps_evals", c.eps_evals},
          {"reward_evals", c.reward_evals},
          {"decodes", c.decodes}};
}

json times_json(const PhaseTimes& t) {
  return {{"denoiser_s", t.denoiser}, {"decoder_s", t.decoder}, {"reward_s", t.reward}, {"total_s", t.total}};
}

bool needs_reward_model(SearchMethod m, const SearchConfig& s) {
  return m == SearchMethod::latsearch || m == SearchMethod::beam ||
         (m == SearchMethod::best_of_n && s.judge == SelectionJudge::reward_model);
}

LatentJudge missing_judge() {
  return [](const Latent&, const Condition&, int) -> RewardVector {
    throw std::logic_error("search: no reward model loaded");
  };
}

RewardNet load_checkpoint(const RunConfig& config, const fs::path& path) {
  RewardNet net = from_checkpoint(read_tensors(path));
  if (!(net.shape() == make_shape(config)))
    throw ConfigError("checkpoint " + path.string() + ": network shape does not match frames/dims/components/steps/embed/hidden");
  return net;
}

LatentDataset load_dataset(const RunConfig& config, const fs::path& dir) {
  LatentDataset data = read_dataset(dir);
  if (data.frames != config.frames || data.dims != config.dims || data.components != config.components ||
      data.steps != config.steps)
    throw ConfigError("dataset " + dir.string() + ": frames/dims/components/steps differ from the config");
  return data;
}

std::string accuracy_field(const AccuracyCell& c) { return c.accuracy ? f(*c.accuracy) : std::string(); }

json accuracy_json(const std::vector<AccuracyCell>& cells) {
  json out = json::array();
  for (const auto& c : cells) {
    out.push_back({{"t", c.t},
                   {"dim", kRewardAxes[c.dim]},
                   {"accuracy", c.accuracy ? json(*c.accuracy) : json(nullptr)},
                   {"pairs", c.pairs}});
  }
  return out;
}

std::string accuracy_csv(const std::vector<AccuracyCell>& cells, const json& stamp) {
  StampedCsv csv({"timestep", "dim", "accuracy", "pairs"}, stamp);
  for (const auto& c : cells) csv.add({f(c.t), kRewardAxes[c.dim], accuracy_field(c), f(c.pairs)});
  return csv.str();
}

void say(std::ostream* progress, const std::string& line) {
  if (progress != nullptr) *progress << line << std::endl;
}

}  // namespace

Latent search_base_noise(const RunConfig& config, int rep) {
  RngStream rng(config.seed, "search.base", static_cast<std::uint64_t>(rep));
  return rng.normal_latent(config.frames, config.dims);
}

std::uint64_t search_seed(const RunConfig& config, int rep) {
  return derive_seed(config.seed, "search.rep", static_cast<std::uint64_t>(rep));
}

std::vector<RunRecord> run_repetitions(const RunConfig& config, SearchMethod method, const SearchConfig& search,
                                       const Pipeline& pipeline, const LatentJudge& judge, std::ostream* progress) {
  std::vector<RunRecord> runs(static_cast<std::size_t>(config.reps));
  std::mutex progress_mutex;
  std::size_t done = 0;
  const std::size_t tick = std::max<std::size_t>(1, runs.size() / 10);
  parallel_for(runs.size(), resolve_workers(config.workers), [&](std::size_t i) {
    RunRecord& r = runs[i];
    r.rep = static_cast<int>(i);
    r.cond = Condition::prompt(r.rep % config.components);
    const Latent base = search_base_noise(config, r.rep);
    SearchConfig s = search;
    s.seed = search_seed(config, r.rep);
    s.workers = 1;
    try {
      SearchResult base_run = vanilla(base, r.cond, pipeline);
      r.baseline_oracle = pipeline.judge(base_run.video, r.cond);
      r.baseline_composite = composite_reward(r.baseline_oracle, s.reward_weights);
      r.baseline_trace = std::move(base_run.trace);
      if (method == SearchMethod::vanilla) {
        r.oracle = r.baseline_oracle;
        r.composite = r.baseline_composite;
        r.trace = r.baseline_trace;
      } else {
        SearchResult res = run_search(method, base, r.cond, s, pipeline, judge);
        r.oracle = pipeline.judge(res.video, r.cond);
        r.composite = composite_reward(r.oracle, s.reward_weights);
        r.trace = std::move(res.trace);
      }
    } catch (const SearchAborted& e) {
      r.failed = true;
      r.error = e.what();
      r.trace = e.trace;
    } catch (const std::exception& e) {
      r.failed = true;
      r.error = e.what();
    }
    if (progress != nullptr) {
      std::lock_guard lock(progress_mutex);
      if (++done % tick == 0 || done == runs.size())
        *progress << to_string(method) << ": " << done << "/" << runs.size() << " repetitions" << std::endl;
    }
  });
  return runs;
}

int matched_beam_width(const std::vector<RunRecord>& runs, int candidates) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : runs) {
    if (r.failed) continue;
    for (std::size_t i = 0; i + 1 < r.trace.scoring.size(); ++i) {
      sum += static_cast<double>(r.trace.scoring[i].survivors.size());
      ++n;
    }
  }
  if (n == 0) return 1;
  return std::clamp(static_cast<int>(std::lround(sum / static_cast<double>(n))), 1, candidates);
}

void check_failure_rate(const std::vector<RunRecord>& runs) {
  const auto failed = std::count_if(runs.begin(), runs.end(), [](const RunRecord& r) { return r.failed; });
  if (static_cast<double>(failed) > 0.05 * static_cast<double>(runs.size())) {
    std::string first;
    for (const auto& r : runs)
      if (r.failed) {
        first = r.error;
        break;
      }
    throw std::runtime_error(std::to_string(failed) + " of " + std::to_string(runs.size()) +
                             " repetitions failed (limit 5%); first: " + first);
  }
}

json metrics_report(const RunConfig& config, SearchMethod method, const SearchConfig& search,
                    const std::vector<RunRecord>& runs) {
  json report = make_stamp(config);
  report["schema"] = kMetricsSchema;
  report["method"] = to_string(method);
  report["baseline"] = "vanilla";
  report["reps"] = runs.size();
  report["search"] = {{"candidates", search.candidates},
                      {"eta", search.eta},
                      {"temperature", search.temperature},
                      {"schedule", search.schedule},
                      {"beam_width", search.beam_width},
                      {"judge", to_string(search.judge)},
                      {"reward_weights", {search.reward_weights(0), search.reward_weights(1), search.reward_weights(2)}}};

  json run_list = json::array(), failures = json::array(), timing_runs = json::array();
  std::vector<double> comp, base_comp, dims[3], base_dims[3];
  SearchCounts total, base_total;
  PhaseTimes t_sum, b_sum;
  for (const auto& r : runs) {
    if (r.failed) {
      failures.push_back({{"rep", r.rep}, {"error", r.error}});
      continue;
    }
    run_list.push_back({{"rep", r.rep},
                        {"prompt", r.cond.index()},
                        {"winner", r.trace.winner},
                        {"oracle", reward_json(r.oracle)},
                        {"composite", r.composite},
                        {"baseline_oracle", reward_json(r.baseline_oracle)},
                        {"baseline_composite", r.baseline_composite},
                        {"counts", counts_json(r.trace.counts)},
                        {"baseline_counts", counts_json(r.baseline_trace.counts)}});
    json tr = times_json(r.trace.times);
    tr["rep"] = r.rep;
    tr["baseline"] = times_json(r.baseline_trace.times);
    timing_runs.push_back(std::move(tr));
    comp.push_back(r.composite);
    base_comp.push_back(r.baseline_composite);
    for (int d = 0; d < 3; ++d) {
      dims[d].push_back(r.oracle[d]);
      base_dims[d].push_back(r.baseline_oracle[d]);
    }
    for (auto [acc, c] : {std::pair{&total, &r.trace.counts}, std::pair{&base_total, &r.baseline_trace.counts}}) {
      acc->step_units += c->step_units;
      acc->drift_calls += c->drift_calls;
      acc->eps_evals += c->eps_evals;
      acc->reward_evals += c->reward_evals;
      acc->decodes += c->decodes;
    }
    for (auto [acc, t] : {std::pair{&t_sum, &r.trace.times}, std::pair{&b_sum, &r.baseline_trace.times}}) {
      acc->denoiser += t->denoiser;
      acc->decoder += t->decoder;
      acc->reward += t->reward;
      acc->total += t->total;
    }
  }
  report["failures"] = failures.size();
  report["failed_reps"] = failures;
  report["runs"] = run_list;

  auto block = [](const std::vector<double>& c, const std::vector<double>* d) {
    json b = {{"composite", summary_json(summarize(c))}};
    for (int k = 0; k < 3; ++k) b[kRewardAxes[k]] = summary_json(summarize(d[k]));
    return b;
  };
  report["aggregate"] = {{"method", block(comp, dims)}, {"baseline", block(base_comp, base_dims)}};

  const double n = std::max<double>(1.0, static_cast<double>(comp.size()));
  auto means = [n](const SearchCounts& c) {
    return json{{"step_units", static_cast<double>(c.step_units) / n},
                {"eps_evals", static_cast<double>(c.eps_evals) / n},
                {"reward_evals", static_cast<double>(c.reward_evals) / n},
                {"decodes", static_cast<double>(c.decodes) / n}};
  };
  report["counts"] = {{"method_total", counts_json(total)},
                      {"baseline_total", counts_json(base_total)},
                      {"method_mean", means(total)},
                      {"baseline_mean", means(base_total)}};

  const WilcoxonResult w = wilcoxon_signed_rank(comp, base_comp, Alternative::greater);
  report["test"] = {{"name", "wilcoxon_signed_rank"},
                    {"alternative", "greater"},
                    {"versus", "vanilla"},
                    {"n", w.n},
                    {"w_plus", w.w_plus},
                    {"z", w.z},
                    {"p", w.p}};
  report["timing"] = {{"clock", "steady"},
                      {"runs", timing_runs},
                      {"method_total", times_json(t_sum)},
                      {"baseline_total", times_json(b_sum)}};
  report["timing"]["phase_sum_within_5pct"] = phase_times_consistent(report);
  return report;
}

bool phase_times_consistent(const json& report, double slack) {
  auto ok = [slack](const json& t) {
    const double sum = t.at("denoiser_s").get<double>() + t.at("decoder_s").get<double>() + t.at("reward_s").get<double>();
    const double total = t.at("total_s").get<double>();
    return std::abs(sum - total) <= slack * total;
  };
  for (const auto& r : report.at("timing").at("runs")) {
    if (!ok(r)) return false;
    if (r.contains("baseline") && !ok(r.at("baseline"))) return false;
  }
  return true;
}

TrainOutcome train_reward_model(const RunConfig& config, const LatentDataset& data) {
  RngStream init(config.seed, "train.init");
  TrainResult res = train(RewardNet::initialized(make_shape(config), init), data.split(true), make_train_config(config));
  return {std::move(res.net), std::move(res.log)};
}

std::vector<AccuracyCell> evaluate_reward_model(const RunConfig& config, const RewardNet& net,
                                                const LatentDataset& data) {
  RngStream ties(config.seed, "eval.ties");
  return eval_preference_accuracy(net_predictor(net), data.split(false), data.timesteps, config.train.eps_tie, ties,
                                  config.train.labels);
}

double mean_accuracy(const std::vector<AccuracyCell>& cells) {
  double sum = 0.0;
  int n = 0;
  for (const auto& c : cells)
    if (c.accuracy) {
      sum += *c.accuracy;
      ++n;
    }
  return n == 0 ? std::nan("") : sum / n;
}

json cmd_build_dataset(const RunConfig& config, const CommandOptions& opts) {
  const json stamp = make_stamp(config);
  say(opts.progress, "build-dataset: calibrating oracle");
  const Pipeline pipeline = make_pipeline(config);
  say(opts.progress, "build-dataset: sampling " + std::to_string(config.prompts * config.seeds_per_prompt) +
                         " trajectories");
  const LatentDataset data = build_dataset(make_dataset_spec(config), pipeline);
  write_dataset(data, opts.dataset_dir(), stamp);
  json manifest = dataset_manifest(data);
  manifest.update(stamp);
  return manifest;
}

json cmd_train_reward(const RunConfig& config, const CommandOptions& opts) {
  const json stamp = make_stamp(config);
  const LatentDataset data = load_dataset(config, opts.dataset_dir());
  say(opts.progress, "train-reward: " + std::to_string(data.train_count()) + " training samples");
  TrainOutcome out = train_reward_model(config, data);
  const fs::path ckpt = opts.checkpoint_path();
  write_tensors(ckpt, to_checkpoint(out.net, stamp));

  StampedCsv csv({"epoch", "lr", "reg_VQ", "reg_MQ", "reg_TA", "pref_VQ", "pref_MQ", "pref_TA", "total"}, stamp);
  for (const auto& e : out.log) {
    csv.add({f(e.epoch), f(e.lr), f(e.loss.reg(0)), f(e.loss.reg(1)), f(e.loss.reg(2)), f(e.loss.pref(0)),
             f(e.loss.pref(1)), f(e.loss.pref(2)), f(e.loss.total)});
  }
  write_file_atomic(ckpt.parent_path() / "loss_curve.csv", csv.str());

  json report = stamp;
  report["schema"] = kTrainSchema;
  report["checkpoint"] = ckpt.filename().string();
  report["train_samples"] = data.train_count();
  report["parameter_count"] = out.net.parameter_count();
  report["initial_total_loss"] = out.log.front().loss.total;
  report["final_total_loss"] = out.log.back().loss.total;
  report["epochs"] = json::array();
  for (const auto& e : out.log) report["epochs"].push_back({{"epoch", e.epoch}, {"lr", e.lr}, {"total", e.loss.total}});
  write_json(ckpt.parent_path() / "train_report.json", report);
  say(opts.progress, "train-reward: loss " + f(report["initial_total_loss"].get<double>()) + " -> " +
                         f(report["final_total_loss"].get<double>()));
  return report;
}

json cmd_eval_reward(const RunConfig& config, const CommandOptions& opts) {
  const json stamp = make_stamp(config);
  const RewardNet net = load_checkpoint(config, opts.checkpoint_path());
  const LatentDataset data = load_dataset(config, opts.dataset_dir());
  if (data.test_count() == 0) throw std::runtime_error("eval-reward: dataset has no held-out split");
  const auto cells = evaluate_reward_model(config, net, data);
  const fs::path dir = opts.out / "eval";
  write_file_atomic(dir / "accuracy.csv", accuracy_csv(cells, stamp));
  json report = stamp;
  report["schema"] = kAccuracySchema;
  report["label"] = "eval";
  report["labels"] = config.train.labels == PreferenceLabels::video ? "video" : "latent_target";
  report["cells"] = accuracy_json(cells);
  report["mean_accuracy"] = mean_accuracy(cells);
  write_json(dir / "accuracy.json", report);
  return report;
}

namespace {

struct SearchSetup {
  Pipeline pipeline;
  std::optional<RewardNet> net;
};

LatentJudge judge_for(const SearchSetup& s) { return s.net ? reward_model_judge(*s.net) : missing_judge(); }

void write_search_outputs(const fs::path& dir, const json& report, const std::vector<RunRecord>& runs,
                          const json& stamp) {
  write_json(dir / "report.json", report);
  StampedCsv csv({"rep", "prompt", "method", "winner", "VQ", "MQ", "TA", "composite", "baseline_composite",
                  "step_units", "eps_evals", "reward_evals", "decodes", "failed"},
                 stamp);
  StampedCsv timing({"rep", "method", "denoiser_s", "decoder_s", "reward_s", "total_s"}, stamp);
  StampedCsv plot({"x", "y", "series"}, stamp);
  std::string traces;
  const std::string method = report.at("method");
  for (const auto& r : runs) {
    const auto& c = r.trace.counts;
    csv.add({f(r.rep), f(r.cond.index()), method, f(r.trace.winner), f(r.oracle.vq), f(r.oracle.mq), f(r.oracle.ta),
             f(r.composite), f(r.baseline_composite), f(c.step_units), f(c.eps_evals), f(c.reward_evals),
             f(c.decodes), r.failed ? "1" : "0"});
    if (r.failed) continue;
    const auto& t = r.trace.times;
    timing.add({f(r.rep), method, f(t.denoiser), f(t.decoder), f(t.reward), f(t.total)});
    plot.add({f(r.rep), f(r.composite), method});
    json tj = to_json(r.trace);
    tj.erase("timing");
    tj.update(stamp);
    tj["rep"] = r.rep;
    traces += tj.dump() + "\n";
  }
  write_file_atomic(dir / "runs.csv", csv.str());
  write_file_atomic(dir / "timing.csv", timing.str());
  write_file_atomic(dir / "reward_by_rep.csv", plot.str());
  write_file_atomic(dir / "traces.jsonl", traces);
}

}  // namespace

json cmd_search(const RunConfig& config, const CommandOptions& opts) {
  const json stamp = make_stamp(config);
  SearchSetup setup{make_pipeline(config), std::nullopt};
  SearchConfig search = config.search;
  if (needs_reward_model(config.method, search)) setup.net = load_checkpoint(config, opts.checkpoint_path());
  const LatentJudge judge = judge_for(setup);

  if (config.method == SearchMethod::beam && config.beam_auto) {
    const auto probe = run_repetitions(config, SearchMethod::latsearch, search, setup.pipeline, judge, opts.progress);
    search.beam_width = matched_beam_width(probe, search.candidates);
    say(opts.progress, "search: beam width matched to latsearch survivors = " + std::to_string(search.beam_width));
  }
  const auto runs = run_repetitions(config, config.method, search, setup.pipeline, judge, opts.progress);
  check_failure_rate(runs);
  json report = metrics_report(config, config.method, search, runs);
  write_search_outputs(opts.out / "search" / to_string(config.method), report, runs, stamp);
  return report;
}

json cmd_ablate(const RunConfig& config, const CommandOptions& opts) {
  const json stamp = make_stamp(config);
  const AblationAxis axis = config.ablate.axis;
  if (config.method == SearchMethod::vanilla) throw ConfigError("search.method: ablation needs a search method, not vanilla");
  const Pipeline pipeline = make_pipeline(config);
  const fs::path dir = opts.out / "ablate" / to_string(axis);

  struct Point {
    std::string label;
    json value;
    SearchConfig search;
    std::optional<RewardNet> net;
    std::vector<AccuracyCell> accuracy;
  };
  std::vector<Point> points;

  const bool trains = axis == AblationAxis::credit || axis == AblationAxis::loss;
  if (trains) {
    const LatentDataset data = load_dataset(config, opts.dataset_dir());
    // Shared held-out labels: cosine-credited latent targets.
    const LatentDataset common = recredit(data, CreditStrategy{});
    auto trained_point = [&](const std::string& label, json value, const RunConfig& variant, const LatentDataset& d) {
      say(opts.progress, "ablate: training " + label);
      TrainOutcome out = train_reward_model(variant, d);
      Point p{label, std::move(value), config.search, std::move(out.net), {}};
      p.accuracy = evaluate_reward_model(config, *p.net, common);
      points.push_back(std::move(p));
    };
    if (axis == AblationAxis::credit) {
      for (CreditKind kind : config.ablate.credits) {
        CreditStrategy cs = config.credit;
        cs.kind = kind;
        trained_point(to_string(kind), to_string(kind), config, recredit(data, cs));
      }
    } else {
      RunConfig reg_only = config;
      reg_only.train.weights.pref = Eigen::Vector3d::Zero();
      trained_point("reg", "reg", reg_only, data);
      trained_point("reg+pref", "reg+pref", config, data);
    }
  } else {
    const RewardNet net = load_checkpoint(config, opts.checkpoint_path());
    auto add = [&](std::string label, json value, SearchConfig s) {
      points.push_back({std::move(label), std::move(value), std::move(s), net, {}});
    };
    if (axis == AblationAxis::temperature) {
      for (double tau : config.ablate.temperatures) {
        SearchConfig s = config.search;
        s.temperature = tau;
        add("tau=" + f(tau), tau, s);
      }
    } else if (axis == AblationAxis::schedule) {
      for (const auto& sched : config.ablate.schedules) {
        SearchConfig s = config.search;
        s.schedule = sched;
        std::string label = "S={";
        for (std::size_t i = 0; i < sched.size(); ++i) label += (i ? " " : "") + std::to_string(sched[i]);
        add(label + "}", sched, s);
      }
    } else {
      for (int n : config.ablate.budgets) {
        SearchConfig s = config.search;
        s.candidates = n;
        s.beam_width = std::min(s.beam_width, n);
        add("N=" + std::to_string(n), n, s);
      }
    }
  }

  json report = stamp;
  report["schema"] = kAblateSchema;
  report["axis"] = to_string(axis);
  report["method"] = to_string(config.method);
  report["points"] = json::array();
  report["timing"] = {{"clock", "steady"}, {"points", json::array()}};
  StampedCsv sweep({"axis", "point", "method", "reps", "failures", "mean_composite", "std_composite", "ci_low",
                    "ci_high", "baseline_mean", "wilcoxon_p", "mean_step_units", "mean_eps_evals",
                    "mean_reward_evals", "mean_accuracy"},
                   stamp);
  StampedCsv timing({"point", "denoiser_s", "decoder_s", "reward_s", "total_s"}, stamp);
  std::vector<double> step_units;
  bool phases_ok = true;
  for (auto& p : points) {
    const LatentJudge judge = reward_model_judge(*p.net);
    if (config.method == SearchMethod::beam && config.beam_auto) {
      const auto probe = run_repetitions(config, SearchMethod::latsearch, p.search, pipeline, judge);
      p.search.beam_width = matched_beam_width(probe, p.search.candidates);
    }
    say(opts.progress, "ablate: " + to_string(axis) + " " + p.label);
    const auto runs = run_repetitions(config, config.method, p.search, pipeline, judge, opts.progress);
    check_failure_rate(runs);
    const json m = metrics_report(config, config.method, p.search, runs);
    phases_ok = phases_ok && phase_times_consistent(m);
    const json& agg = m.at("aggregate");
    const double mean_steps = m.at("counts").at("method_mean").at("step_units");
    step_units.push_back(mean_steps);
    json point = {{"label", p.label},
                  {"value", p.value},
                  {"search", m.at("search")},
                  {"reps", m.at("reps")},
                  {"failures", m.at("failures")},
                  {"aggregate", agg},
                  {"counts", m.at("counts")},
                  {"test", m.at("test")}};
    if (trains) {
      point["accuracy"] = accuracy_json(p.accuracy);
      point["mean_accuracy"] = mean_accuracy(p.accuracy);
      write_file_atomic(dir / ("accuracy_" + p.label + ".csv"), accuracy_csv(p.accuracy, stamp));
    }
    report["points"].push_back(point);
    report["timing"]["points"].push_back({{"label", p.label}, {"totals", m.at("timing").at("method_total")}});
    const auto& comp = agg.at("method").at("composite");
    sweep.add({to_string(axis), p.label, to_string(config.method), f(m.at("reps").get<std::size_t>()),
               f(m.at("failures").get<std::size_t>()), f(comp.at("mean").get<double>()),
               f(comp.at("std").get<double>()), f(comp.at("ci_low").get<double>()), f(comp.at("ci_high").get<double>()),
               f(agg.at("baseline").at("composite").at("mean").get<double>()), f(m.at("test").at("p").get<double>()),
               f(mean_steps), f(m.at("counts").at("method_mean").at("eps_evals").get<double>()),
               f(m.at("counts").at("method_mean").at("reward_evals").get<double>()),
               trains ? f(mean_accuracy(p.accuracy)) : std::string()});
    const auto& tt = m.at("timing").at("method_total");
    timing.add({p.label, f(tt.at("denoiser_s").get<double>()), f(tt.at("decoder_s").get<double>()),
                f(tt.at("reward_s").get<double>()), f(tt.at("total_s").get<double>())});
  }
  if (axis == AblationAxis::budget) {
    bool increasing = true;
    for (std::size_t i = 1; i < step_units.size(); ++i) increasing = increasing && step_units[i] > step_units[i - 1];
    report["step_units_increasing"] = increasing;
  }
  report["timing"]["phase_sum_within_5pct"] = phases_ok;
  write_json(dir / "report.json", report);
  write_file_atomic(dir / "sweep.csv", sweep.str());
  write_file_atomic(dir / "timing.csv", timing.str());
  return report;
}

json cmd_plot(const RunConfig& config, const CommandOptions& opts) {
  const json stamp = make_stamp(config);
  if (opts.inputs.empty()) throw ConfigError("plot: no report files given");
  std::vector<json> reports;
  std::vector<std::string> names;
  std::string schema;
  for (const auto& path : opts.inputs) {
    json j;
    try {
      j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
      throw ConfigError("plot: " + path.string() + " is not JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("schema") || !j.at("schema").is_string())
      throw ConfigError("plot: " + path.string() + ": missing field 'schema'");
    const std::string s = j.at("schema");
    if (s != kMetricsSchema && s != kAccuracySchema && s != kAblateSchema)
      throw ConfigError("plot: " + path.string() + ": field 'schema' has unsupported value '" + s + "'");
    if (schema.empty()) schema = s;
    if (s != schema)
      throw ConfigError("plot: field 'schema' differs between inputs ('" + schema + "' vs '" + s + "' in " +
                        path.string() + ")");
    reports.push_back(std::move(j));
    names.push_back(path.parent_path().filename().string() + "/" + path.stem().string());
  }
  const fs::path dir = opts.out / "plot";
  const std::string comment = "config_hash " + stamp.at("config_hash").get<std::string>() + " tool_version " +
                              stamp.at("tool_version").get<std::string>();
  json written = json::array();
  auto emit = [&](const std::string& stem, const std::vector<ChartSeries>& series, ChartLabels labels) {
    StampedCsv csv({"x", "y", "series"}, stamp);
    for (const auto& s : series)
      for (auto [x, y] : s.points) csv.add({f(x), f(y), s.name});
    labels.comment = comment;
    write_file_atomic(dir / (stem + ".csv"), csv.str());
    write_file_atomic(dir / (stem + ".svg"), line_chart_svg(series, labels));
    written.push_back(stem + ".csv");
    written.push_back(stem + ".svg");
  };
  auto label = [&](std::size_t i, const std::string& inner) { return reports.size() == 1 ? inner : names[i] + ":" + inner; };

  if (schema == kMetricsSchema) {
    std::vector<ChartSeries> reward;
    std::vector<std::string> categories;
    std::vector<std::vector<double>> phases(3);
    StampedCsv breakdown({"x", "y", "series"}, stamp);
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const json& r = reports[i];
      if (!phase_times_consistent(r))
        throw std::runtime_error("plot: " + opts.inputs[i].string() + ": phase times do not sum to total within 5%");
      ChartSeries s{label(i, r.at("method")), {}};
      for (const auto& run : r.at("runs")) s.points.emplace_back(run.at("rep").get<double>(), run.at("composite").get<double>());
      reward.push_back(std::move(s));
      for (const auto& t : r.at("timing").at("runs")) {
        const std::string x = f(t.at("rep").get<int>());
        for (const char* k : {"denoiser_s", "decoder_s", "reward_s", "total_s"})
          breakdown.add({x, f(t.at(k).get<double>()), label(i, std::string(k).substr(0, std::string(k).size() - 2))});
      }
      const auto& tot = r.at("timing").at("method_total");
      categories.push_back(label(i, r.at("method")));
      phases[0].push_back(tot.at("denoiser_s"));
      phases[1].push_back(tot.at("decoder_s"));
      phases[2].push_back(tot.at("reward_s"));
    }
    emit("reward_by_rep", reward, {"Final oracle reward per repetition", "repetition", "composite reward", ""});
    write_file_atomic(dir / "timing_breakdown.csv", breakdown.str());
    write_file_atomic(dir / "timing_breakdown.svg",
                      stacked_bar_svg(categories, {"denoiser", "decoder", "reward"}, phases,
                                      {"Time breakdown", "run set", "seconds", comment}));
    written.push_back("timing_breakdown.csv");
    written.push_back("timing_breakdown.svg");
  } else if (schema == kAccuracySchema) {
    std::vector<ChartSeries> series;
    for (std::size_t i = 0; i < reports.size(); ++i) {
      std::map<int, std::pair<double, int>> by_t;
      for (const auto& c : reports[i].at("cells")) {
        if (c.at("accuracy").is_null()) continue;
        auto& [sum, n] = by_t[c.at("t").get<int>()];
        sum += c.at("accuracy").get<double>();
        ++n;
      }
      ChartSeries s{label(i, reports[i].value("label", std::string("accuracy"))), {}};
      for (auto it = by_t.rbegin(); it != by_t.rend(); ++it)
        s.points.emplace_back(it->first, it->second.first / it->second.second);
      series.push_back(std::move(s));
    }
    emit("accuracy_vs_timestep", series, {"Held-out pairwise accuracy", "timestep", "accuracy (mean over VQ/MQ/TA)", ""});
  } else {
    std::vector<ChartSeries> series;
    std::string axis;
    for (std::size_t i = 0; i < reports.size(); ++i) {
      axis = reports[i].at("axis");
      ChartSeries s{label(i, axis + ":" + reports[i].at("method").get<std::string>()), {}};
      int idx = 0;
      for (const auto& p : reports[i].at("points")) {
        const double x = p.at("value").is_number() ? p.at("value").get<double>() : static_cast<double>(idx);
        s.points.emplace_back(x, p.at("aggregate").at("method").at("composite").at("mean").get<double>());
        ++idx;
      }
      series.push_back(std::move(s));
    }
    const std::string stem = axis == "budget" ? "reward_vs_budget" : "reward_vs_" + axis;
    emit(stem, series, {"Final oracle reward across the " + axis + " sweep", axis == "budget" ? "N" : axis, "composite reward", ""});
  }
  json out = stamp;
  out["schema"] = schema;
  out["files"] = written;
  return out;
}

json cmd_replay(const RunConfig& config, const CommandOptions& opts) {
  if (opts.inputs.empty()) throw ConfigError("replay: no trace files given");
  const Pipeline pipeline = make_pipeline(config);
  std::optional<RewardNet> net;
  std::size_t replayed = 0;
  for (const auto& path : opts.inputs) {
    std::istringstream lines(read_file(path));
    std::string line;
    while (std::getline(lines, line)) {
      if (line.empty()) continue;
      const SearchTrace trace = trace_from_json(json::parse(line));
      if (needs_reward_model(trace.method, config_from_trace(trace)) && !net)
        net = load_checkpoint(config, opts.checkpoint_path());
      replay(trace, pipeline, net ? reward_model_judge(*net) : missing_judge());
      ++replayed;
    }
  }
  json out = make_stamp(config);
  out["replayed"] = replayed;
  out["identical"] = true;
  say(opts.progress, "replay: " + std::to_string(replayed) + " traces reproduced identical decisions");
  return out;
}

std::map<std::string, std::string> content_hashes(const fs::path& dir) {
  std::map<std::string, std::string> out;
  auto fnv = [](const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
  };
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const fs::path& p = entry.path();
    const std::string name = p.filename().string();
    if (name.find("timing") != std::string::npos) continue;
    std::string content = read_file(p);
    if (p.extension() == ".json") {
      json j = json::parse(content);
      if (j.is_object()) j.erase("timing");
      content = j.dump();
    } else if (p.extension() == ".jsonl") {
      std::istringstream in(content);
      std::string line, norm;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        if (j.is_object()) j.erase("timing");
        norm += j.dump() + "\n";
      }
      content = norm;
    }
    out[fs::relative(p, dir).generic_string()] = fnv(content);
  }
  return out;
}

}  // namespace latsearch
