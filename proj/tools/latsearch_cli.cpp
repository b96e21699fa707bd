// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "latsearch/bench.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace latsearch;
using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;
  std::optional<int> reps;
  std::optional<int> workers;
  std::optional<std::string> axis;
  std::string dataset;
  std::string checkpoint;
  std::vector<std::string> inputs;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON run configuration (defaults when omitted)");
  cmd->add_option("--out", f.out, "output root (default: config output_dir, then $" + std::string(kOutputEnv) + ")");
  cmd->add_option("--seed", f.seed, "master seed override");
  cmd->add_option("--method", f.method, "search method: vanilla, latsearch, best_of_n, beam");
  cmd->add_option("--reps", f.reps, "repetitions override");
  cmd->add_option("--workers", f.workers, "worker threads (0 = all cores)");
  cmd->add_option("--dataset", f.dataset, "dataset directory (default <out>/dataset)");
  cmd->add_option("--checkpoint", f.checkpoint, "reward checkpoint (default <out>/reward/checkpoint.ltsr)");
  cmd->add_flag("--quiet", f.quiet, "no progress lines on stderr");
}

RunConfig resolve_config(const Flags& f) {
  json j = f.config.empty() ? json::object() : to_json(load_config(f.config));
  if (f.seed) j["seed"] = *f.seed;
  if (f.workers) j["workers"] = *f.workers;
  if (f.method) j["search"]["method"] = *f.method;
  if (f.reps) j["search"]["reps"] = *f.reps;
  if (f.axis) j["ablate"]["axis"] = *f.axis;
  return parse_config(j);
}

std::string brief(const std::string& command, const json& r) {
  if (command == "build-dataset")
    return "samples " + std::to_string(r.at("counts").at("samples").get<std::size_t>()) + " (train " +
           std::to_string(r.at("counts").at("train_samples").get<std::size_t>()) + ", test " +
           std::to_string(r.at("counts").at("test_samples").get<std::size_t>()) + ")";
  if (command == "train-reward")
    return "total loss " + CsvTable::field(r.at("initial_total_loss").get<double>()) + " -> " +
           CsvTable::field(r.at("final_total_loss").get<double>());
  if (command == "eval-reward") return "mean accuracy " + CsvTable::field(r.at("mean_accuracy").get<double>());
  if (command == "search") {
    const auto& a = r.at("aggregate");
    return r.at("method").get<std::string>() + " mean " +
           CsvTable::field(a.at("method").at("composite").at("mean").get<double>()) + " vs vanilla " +
           CsvTable::field(a.at("baseline").at("composite").at("mean").get<double>()) + ", Wilcoxon p " +
           CsvTable::field(r.at("test").at("p").get<double>());
  }
  if (command == "ablate") return r.at("axis").get<std::string>() + ": " + std::to_string(r.at("points").size()) + " points";
  if (command == "plot") return std::to_string(r.at("files").size()) + " files";
  if (command == "replay") return std::to_string(r.at("replayed").get<std::size_t>()) + " traces identical";
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"latsearch: latent reward-guided search on an analytic video-diffusion testbed"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  Flags flags;

  struct Entry {
    const char* name;
    const char* help;
    json (*run)(const RunConfig&, const CommandOptions&);
  };
  const Entry entries[] = {
      {"build-dataset", "sample trajectories, judge them and write the latent reward dataset", cmd_build_dataset},
      {"train-reward", "train the latent reward model on a dataset", cmd_train_reward},
      {"eval-reward", "held-out pairwise accuracy per timestep and reward axis", cmd_eval_reward},
      {"search", "run a search method for the configured repetitions and report metrics", cmd_search},
      {"ablate", "sweep one axis: credit, temperature, schedule, loss or budget", cmd_ablate},
      {"plot", "turn report files into plot data and SVG charts", cmd_plot},
      {"replay", "re-execute traces and check every decision matches", cmd_replay},
  };
  std::vector<std::pair<CLI::App*, const Entry*>> commands;
  for (const auto& e : entries) {
    CLI::App* cmd = app.add_subcommand(e.name, e.help);
    add_common(cmd, flags);
    if (std::string(e.name) == "ablate") cmd->add_option("--axis", flags.axis, "credit, temperature, schedule, loss, budget");
    if (std::string(e.name) == "plot") cmd->add_option("reports", flags.inputs, "report JSON files")->required();
    if (std::string(e.name) == "replay") cmd->add_option("traces", flags.inputs, "trace JSONL files")->required();
    commands.emplace_back(cmd, &e);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  for (const auto& [cmd, entry] : commands) {
    if (!cmd->parsed()) continue;
    try {
      const RunConfig config = resolve_config(flags);
      CommandOptions opts;
      opts.out = !flags.out.empty() ? std::filesystem::path(flags.out)
                 : !config.output_dir.empty() ? std::filesystem::path(config.output_dir)
                                              : default_output_root();
      if (!flags.dataset.empty()) opts.dataset = flags.dataset;
      if (!flags.checkpoint.empty()) opts.checkpoint = flags.checkpoint;
      for (const auto& p : flags.inputs) opts.inputs.emplace_back(p);
      opts.progress = flags.quiet ? nullptr : &std::cerr;
      const json result = entry->run(config, opts);
      std::cout << entry->name << ": " << brief(entry->name, result) << " [config " << config_hash(config) << ", out "
                << opts.out.string() << "]\n";
      return 0;
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kExitConfig;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitRuntime;
    }
  }
  return kExitConfig;
}
