// oaipp: run single missions, benchmark campaigns, or emit scenario configs.
//
//   oaipp run       [--config PATH] [--planner NAME] [--seed N] [--out DIR] [--verbose]
//   oaipp benchmark [--config PATH] [--planner NAME]... [--trials N] [--seed N] [--out DIR]
//   oaipp scenario  NAME [--count N] [--layout-seed N] [--out FILE]
//
// Exit codes: 0 success, 2 bad input, 3 a mission aborted.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "oaipp/config.hpp"
#include "oaipp/io.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitBadInput = 2;
constexpr int kExitAborted = 3;

struct BadInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
  return out;
}

oaipp::PlannerKind planner_or_throw(const std::string& name) {
  const auto kind = oaipp::parse_planner(name);
  if (!kind) throw BadInput("unknown planner '" + name + "' (valid: " + join(oaipp::planner_names()) + ")");
  return *kind;
}

oaipp::MissionConfig load(const std::string& path) {
  if (path.empty()) return oaipp::benchmark_scenario();
  try {
    return oaipp::load_config(path);
  } catch (const oaipp::ConfigError& e) {
    throw BadInput(e.what());
  }
}

fs::path output_dir(const std::string& flag) {
  if (const char* env = std::getenv("OAIPP_OUT"); env && *env) return env;
  return flag;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct RunArgs {
  std::string config;
  std::string planner;
  std::optional<std::uint64_t> seed;
  std::string out = "results";
  bool verbose = false;
};

int cmd_run(const RunArgs& a) {
  oaipp::MissionConfig cfg = load(a.config);
  if (!a.planner.empty()) cfg.planner = planner_or_throw(a.planner);
  if (a.seed) cfg.seed = *a.seed;
  try {
    cfg.validate();
  } catch (const oaipp::ConfigError& e) {
    throw BadInput(e.what());
  }
  const auto t0 = std::chrono::steady_clock::now();
  oaipp::MissionOptions opts;
  opts.trace_optimizer = a.verbose;
  const oaipp::MissionLog log = oaipp::run_mission(cfg, opts);
  const fs::path dir = output_dir(a.out) / oaipp::to_string(cfg.planner) / std::to_string(cfg.seed);
  oaipp::write_mission_artifacts(dir, log, cfg, seconds_since(t0));
  for (const auto& w : log.warnings) std::cerr << "warning: " << w << "\n";
  if (a.verbose) {
    std::cerr << "detections " << log.detections_count << ", flight time " << log.flight_time << " s, final rse "
              << log.samples.back().rse << "\n";
  }
  std::cout << dir.string() << "\n";
  if (log.aborted) {
    std::cerr << "mission aborted: " << log.diagnostic << "\n";
    return kExitAborted;
  }
  return 0;
}

struct BenchArgs {
  std::string config;
  std::vector<std::string> planners;
  int trials = 25;
  std::optional<std::uint64_t> seed;
  std::string out = "results";
  bool verbose = false;
};

int cmd_benchmark(const BenchArgs& a) {
  oaipp::MissionConfig base = load(a.config);
  if (a.seed) base.seed = *a.seed;
  if (a.trials < 1) throw BadInput("--trials must be >= 1");
  const std::vector<std::string> names = a.planners.empty() ? oaipp::planner_names() : a.planners;
  std::vector<oaipp::PlannerKind> kinds;
  for (const auto& n : names) kinds.push_back(planner_or_throw(n));
  try {
    base.validate();
  } catch (const oaipp::ConfigError& e) {
    throw BadInput(e.what());
  }

  const fs::path root = output_dir(a.out);
  const oaipp::FieldMap prior = oaipp::make_prior(base);
  std::vector<std::pair<std::string, oaipp::TrialSummary>> runs;
  bool any_aborted = false;
  for (const auto kind : kinds) {
    oaipp::MissionConfig cfg = base;
    cfg.planner = kind;
    const std::string name = oaipp::to_string(kind);
    oaipp::TrialSummary summary;
    for (int i = 0; i < a.trials; ++i) {
      oaipp::MissionConfig trial = cfg;
      trial.seed = cfg.seed + static_cast<std::uint64_t>(i);
      const auto t0 = std::chrono::steady_clock::now();
      oaipp::MissionOptions opts;
      opts.prior = &prior;
      oaipp::MissionLog log = oaipp::run_mission(trial, opts);
      oaipp::write_mission_artifacts(root / name / std::to_string(trial.seed), log, trial, seconds_since(t0));
      if (a.verbose) {
        std::cerr << name << " seed " << trial.seed << ": final rse " << log.samples.back().rse << " ("
                  << seconds_since(t0) << " s)\n";
      }
      if (log.aborted) {
        any_aborted = true;
        std::cerr << name << " seed " << trial.seed << " aborted: " << log.diagnostic << "\n";
        summary.aborted_seeds.push_back(trial.seed);
        summary.abort_diagnostics.push_back(log.diagnostic);
        continue;
      }
      summary.seeds.push_back(trial.seed);
      summary.logs.push_back(std::move(log));
    }
    oaipp::aggregate(summary, cfg.budget, cfg.bin_width);
    oaipp::detail::write_text(root / name / "aggregate.csv", oaipp::aggregate_csv(summary));
    summary.logs.clear();  // keep memory flat across planners; the aggregate is all that is needed
    runs.emplace_back(name, std::move(summary));
  }
  oaipp::detail::write_text(root / "comparison.csv", oaipp::comparison_csv(runs));
  std::cout << root.string() << "\n";
  return any_aborted ? kExitAborted : 0;
}

struct ScenarioArgs {
  std::string name;
  int count = 15;
  std::uint64_t layout_seed = 0;
  std::string out;
};

int cmd_scenario(const ScenarioArgs& a) {
  oaipp::MissionConfig cfg;
  try {
    cfg = oaipp::make_scenario(a.name, a.count, a.layout_seed);
  } catch (const oaipp::ConfigError& e) {
    throw BadInput(std::string(e.what()) + " (valid: " + join(oaipp::scenario_names()) + ")");
  }
  const std::string text = oaipp::to_json(cfg).dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    oaipp::detail::write_text(a.out, text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Obstacle-aware adaptive informative path planning for UAV target search"};
  app.require_subcommand(1);
  app.set_version_flag("--version", oaipp::kVersion);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Fly one mission and write its log");
  run_cmd->add_option("--config", run.config, "Mission config (JSON); defaults to the benchmark scenario");
  run_cmd->add_option("--planner", run.planner, "oaipp-adaptive | oaipp-nonadaptive | lawnmower | random");
  run_cmd->add_option("--seed", run.seed, "Override the config seed");
  run_cmd->add_option("--out", run.out, "Output directory (OAIPP_OUT overrides)");
  run_cmd->add_flag("--verbose", run.verbose, "Progress on stderr and an optimizer trace CSV");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("benchmark", "Run seeded trials per planner and aggregate them");
  bench_cmd->add_option("--config", bench.config, "Mission config (JSON); defaults to the benchmark scenario");
  bench_cmd->add_option("--planner", bench.planners, "Planner to include (repeatable; default all four)");
  bench_cmd->add_option("--trials", bench.trials, "Trials per planner");
  bench_cmd->add_option("--seed", bench.seed, "First trial seed");
  bench_cmd->add_option("--out", bench.out, "Output directory (OAIPP_OUT overrides)");
  bench_cmd->add_flag("--verbose", bench.verbose, "Per-trial progress on stderr");

  ScenarioArgs scen;
  auto* scen_cmd = app.add_subcommand("scenario", "Print a canned scenario config");
  scen_cmd->add_option("name", scen.name, "benchmark | density-low | density-high | narrow")->required();
  scen_cmd->add_option("--count", scen.count, "Obstacle count for the density scenarios");
  scen_cmd->add_option("--layout-seed", scen.layout_seed, "Obstacle placement seed for the density scenarios");
  scen_cmd->add_option("--out", scen.out, "Write to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitBadInput;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*bench_cmd) return cmd_benchmark(bench);
    return cmd_scenario(scen);
  } catch (const BadInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
