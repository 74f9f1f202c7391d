// Result artifacts: CSV time series, per-mission JSON logs and run manifests.

#pragma once

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oaipp/config.hpp"
#include "oaipp/mission.hpp"
#include "oaipp/version.hpp"

namespace oaipp {

namespace detail {

// Locale-independent, round-trippable number text.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace detail

/// One row per fusion event.
inline std::string mission_csv(const MissionLog& log) {
  std::ostringstream out;
  out << "t,rse,trace\n";
  for (const auto& s : log.samples) {
    out << detail::num(s.t) << ',' << detail::num(s.rse) << ',' << detail::num(s.trace) << '\n';
  }
  return out.str();
}

/// Measurement poses with their timestamps.
inline std::string poses_csv(const MissionLog& log) {
  std::ostringstream out;
  out << "t,x,y,z\n";
  for (std::size_t i = 0; i < log.executed_poses.size(); ++i) {
    const Vec3& p = log.executed_poses[i];
    out << detail::num(log.pose_times[i]) << ',' << detail::num(p.x()) << ',' << detail::num(p.y()) << ','
        << detail::num(p.z()) << '\n';
  }
  return out.str();
}

inline std::string aggregate_csv(const TrialSummary& summary) {
  std::ostringstream out;
  out << "t,rse_mean,rse_std,trace_mean,trace_std\n";
  for (std::size_t b = 0; b < summary.times.size(); ++b) {
    out << detail::num(summary.times[b]) << ',' << detail::num(summary.rse_mean[b]) << ','
        << detail::num(summary.rse_std[b]) << ',' << detail::num(summary.trace_mean[b]) << ','
        << detail::num(summary.trace_std[b]) << '\n';
  }
  return out.str();
}

/// Long-format table of several planners' aggregates.
inline std::string comparison_csv(const std::vector<std::pair<std::string, TrialSummary>>& runs) {
  std::ostringstream out;
  out << "planner,t,rse_mean,rse_std,trace_mean,trace_std,trials\n";
  for (const auto& [name, summary] : runs) {
    for (std::size_t b = 0; b < summary.times.size(); ++b) {
      out << name << ',' << detail::num(summary.times[b]) << ',' << detail::num(summary.rse_mean[b]) << ','
          << detail::num(summary.rse_std[b]) << ',' << detail::num(summary.trace_mean[b]) << ','
          << detail::num(summary.trace_std[b]) << ',' << summary.logs.size() << '\n';
    }
  }
  return out.str();
}

inline std::string optimizer_trace_csv(const std::vector<CmaesGeneration>& trace) {
  std::ostringstream out;
  out << "generation,evaluations,best_f,sigma\n";
  for (const auto& g : trace) {
    out << g.generation << ',' << g.evaluations << ',' << detail::num(g.best_f) << ',' << detail::num(g.sigma)
        << '\n';
  }
  return out.str();
}

inline nlohmann::json mission_json(const MissionLog& log, const MissionConfig& cfg) {
  using detail::vec_json;
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : log.samples) samples.push_back({{"t", s.t}, {"rse", s.rse}, {"trace", s.trace}});
  nlohmann::json poses = nlohmann::json::array();
  for (std::size_t i = 0; i < log.executed_poses.size(); ++i) {
    poses.push_back({{"t", log.pose_times[i]}, {"pose", vec_json(log.executed_poses[i])}});
  }
  nlohmann::json paths = nlohmann::json::array();
  for (std::size_t i = 0; i < log.planned_paths.size(); ++i) {
    nlohmann::json wps = nlohmann::json::array();
    for (const auto& w : log.planned_paths[i]) wps.push_back(vec_json(w));
    paths.push_back({{"start_time", log.path_start_times[i]}, {"waypoints", wps}});
  }
  const GridSpec grid = field_grid(cfg);
  const TargetRecovery rec =
      target_recovery(grid, log.final_mean, cfg.field.targets, cfg.field.target_size, cfg.field.threshold);
  return {{"planner", to_string(cfg.planner)},
          {"seed", cfg.seed},
          {"aborted", log.aborted},
          {"diagnostic", log.diagnostic},
          {"warnings", log.warnings},
          {"flight_time", log.flight_time},
          {"detections_count", log.detections_count},
          {"collision_count", log.collision_count},
          {"false_positives_injected", log.false_positives_injected},
          {"degenerate_viewpoints", log.degenerate_viewpoints},
          {"targets_recovered", rec.recovered},
          {"false_positive_blobs", rec.false_positives},
          {"samples", samples},
          {"measurements", poses},
          {"paths", paths},
          {"final_mean", std::vector<double>(log.final_mean.data(), log.final_mean.data() + log.final_mean.size())}};
}

struct RunManifest {
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::vector<std::string> artifacts;  // relative to the manifest's directory
  double wall_clock_s = 0.0;
  std::string version = kVersion;

  [[nodiscard]] nlohmann::json to_json() const {
    return {{"config", config},
            {"seed", seed},
            {"artifacts", artifacts},
            {"wall_clock_s", wall_clock_s},
            {"version", version}};
  }
};

/// Writes mission.csv, mission.json (and optimizer.csv when the log carries a
/// trace) plus manifest.json into `dir`. Returns the manifest written.
inline RunManifest write_mission_artifacts(const std::filesystem::path& dir, const MissionLog& log,
                                           const MissionConfig& cfg, double wall_clock_s) {
  RunManifest m;
  m.config = to_json(cfg);
  m.seed = cfg.seed;
  m.wall_clock_s = wall_clock_s;
  detail::write_text(dir / "mission.csv", mission_csv(log));
  m.artifacts.push_back("mission.csv");
  detail::write_text(dir / "mission.json", mission_json(log, cfg).dump(2) + "\n");
  m.artifacts.push_back("mission.json");
  if (!log.optimizer_trace.empty()) {
    detail::write_text(dir / "optimizer.csv", optimizer_trace_csv(log.optimizer_trace));
    m.artifacts.push_back("optimizer.csv");
  }
  m.artifacts.push_back("manifest.json");
  detail::write_text(dir / "manifest.json", m.to_json().dump(2) + "\n");
  return m;
}

}  // namespace oaipp
