// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "latsearch/config.hpp"
#include "latsearch/search.hpp"
#include "latsearch/stats.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace latsearch {

inline constexpr const char* kToolVersion = LATSEARCH_VERSION;
inline constexpr const char* kOutputEnv = "LATSEARCH_OUT";

inline constexpr const char* kMetricsSchema = "latsearch.metrics_report/1";
inline constexpr const char* kAccuracySchema = "latsearch.accuracy_report/1";
inline constexpr const char* kAblateSchema = "latsearch.ablate_report/1";
inline constexpr const char* kTrainSchema = "latsearch.train_report/1";

// $LATSEARCH_OUT when set and non-empty, else ./latsearch_out.
std::filesystem::path default_output_root();

// RFC 4180 text: comma separated, CRLF line ends, quoting only where needed.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);
  void add(std::vector<std::string> row);
  std::string str() const;
  std::size_t rows() const { return rows_.size(); }

  static std::string field(double v);  // shortest round-trip decimal
  static std::string field(std::int64_t v);

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

// {"config_hash", "tool_version"} for one run.
nlohmann::json make_stamp(const RunConfig& config);

struct CommandOptions {
  std::filesystem::path out;  // output root; each command writes its own subdirectory
  std::optional<std::filesystem::path> dataset;     // default <out>/dataset
  std::optional<std::filesystem::path> checkpoint;  // default <out>/reward/checkpoint.ltsr
  std::vector<std::filesystem::path> inputs;        // plot: report files; replay: trace files
  std::ostream* progress = nullptr;

  std::filesystem::path dataset_dir() const;
  std::filesystem::path checkpoint_path() const;
};

// Per-repetition record used by search and ablation reports.
struct RunRecord {
  int rep = 0;
  Condition cond;
  bool failed = false;
  std::string error;
  RewardVector oracle;  // final video under the oracle
  double composite = 0.0;
  SearchTrace trace;
  RewardVector baseline_oracle;  // vanilla from the same base noise
  double baseline_composite = 0.0;
  SearchTrace baseline_trace;
};

Latent search_base_noise(const RunConfig& config, int rep);
std::uint64_t search_seed(const RunConfig& config, int rep);

// Repetition r conditions on prompt r mod K, draws base noise from ("search.base", r)
// and runs `method` plus a vanilla baseline on that noise.
std::vector<RunRecord> run_repetitions(const RunConfig& config, SearchMethod method, const SearchConfig& search,
                                       const Pipeline& pipeline, const LatentJudge& judge,
                                       std::ostream* progress = nullptr);

// Mean surviving candidates after the non-final scoring steps of latsearch runs, rounded
// and clamped to [1, N]: the beam width that matches RGRP's retained set.
int matched_beam_width(const std::vector<RunRecord>& latsearch_runs, int candidates);

// Throws std::runtime_error when more than 5% of repetitions failed.
void check_failure_rate(const std::vector<RunRecord>& runs);

nlohmann::json metrics_report(const RunConfig& config, SearchMethod method, const SearchConfig& search,
                              const std::vector<RunRecord>& runs);

// Every run in the report has denoiser + decoder + reward within `slack` of its total.
bool phase_times_consistent(const nlohmann::json& report, double slack = 0.05);

struct TrainOutcome {
  RewardNet net;
  std::vector<EpochLog> log;
};

TrainOutcome train_reward_model(const RunConfig& config, const LatentDataset& data);
std::vector<AccuracyCell> evaluate_reward_model(const RunConfig& config, const RewardNet& net,
                                                const LatentDataset& data);
double mean_accuracy(const std::vector<AccuracyCell>& cells);

nlohmann::json cmd_build_dataset(const RunConfig& config, const CommandOptions& opts);
nlohmann::json cmd_train_reward(const RunConfig& config, const CommandOptions& opts);
nlohmann::json cmd_eval_reward(const RunConfig& config, const CommandOptions& opts);
nlohmann::json cmd_search(const RunConfig& config, const CommandOptions& opts);
nlohmann::json cmd_ablate(const RunConfig& config, const CommandOptions& opts);
nlohmann::json cmd_plot(const RunConfig& config, const CommandOptions& opts);
nlohmann::json cmd_replay(const RunConfig& config, const CommandOptions& opts);

// FNV-1a 64 per output file under `dir`, skipping timing content: files whose name
// contains "timing" are omitted and JSON / JSONL records drop their "timing" member.
std::map<std::string, std::string> content_hashes(const std::filesystem::path& dir);

}  // namespace latsearch
