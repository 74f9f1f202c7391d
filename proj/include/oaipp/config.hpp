// JSON mission configuration and the canned scenarios.

#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oaipp/mission.hpp"

namespace oaipp {

using json = nlohmann::json;

namespace detail {

inline json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
inline json vec_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  ~Reader() = default;

  /// Throws if the object carries keys nobody asked for.
  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) throw ConfigError(where(key) + ": unknown key");
    }
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!node_.contains(key)) return;
    try {
      out = node_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + ": wrong type");
    }
  }

  void get(const std::string& key, Vec3& out) {
    seen_.insert(key);
    if (!node_.contains(key)) return;
    out = vec3(node_.at(key), where(key));
  }

  void get(const std::string& key, Vec2& out) {
    seen_.insert(key);
    if (!node_.contains(key)) return;
    const auto v = numbers(node_.at(key), where(key), 2);
    out = Vec2(v[0], v[1]);
  }

  [[nodiscard]] bool has(const std::string& key) const { return node_.contains(key); }

  Reader child(const std::string& key) {
    seen_.insert(key);
    return Reader(node_.contains(key) ? node_.at(key) : empty(), where(key));
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return node_.at(key);
  }

  [[nodiscard]] std::string where(const std::string& key) const { return path_ + "." + key; }

  static Vec3 vec3(const json& j, const std::string& where) {
    const auto v = numbers(j, where, 3);
    return Vec3(v[0], v[1], v[2]);
  }

  static std::vector<double> numbers(const json& j, const std::string& where, std::size_t count) {
    if (!j.is_array() || j.size() != count) {
      throw ConfigError(where + ": expected an array of " + std::to_string(count) + " numbers");
    }
    std::vector<double> out;
    for (const auto& e : j) {
      if (!e.is_number()) throw ConfigError(where + ": expected numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

 private:
  static const json& empty() {
    static const json e = json::object();
    return e;
  }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace detail

inline json to_json(const MissionConfig& cfg) {
  using detail::vec_json;
  json obstacles = json::array();
  for (const auto& b : cfg.world.obstacles) {
    obstacles.push_back({{"min", vec_json(b.min_corner)}, {"max", vec_json(b.max_corner)}});
  }
  json targets = json::array();
  for (const auto& t : cfg.field.targets) targets.push_back(vec_json(t));
  const auto& s = cfg.sensing;
  return json{
      {"seed", cfg.seed},
      {"world",
       {{"bounds", {{"min", vec_json(cfg.world.bounds.min)}, {"max", vec_json(cfg.world.bounds.max)}}},
        {"voxel_size", cfg.world.voxel_size},
        {"include_bounds", cfg.world.include_bounds},
        {"obstacles", obstacles}}},
      {"field",
       {{"resolution", cfg.field.resolution},
        {"extent", vec_json(cfg.field.extent)},
        {"origin", vec_json(cfg.field.origin)},
        {"prior_mean", cfg.field.prior_mean},
        {"hyperparams",
         {{"lengthscale", cfg.field.hyperparams.lengthscale},
          {"signal_variance", cfg.field.hyperparams.signal_variance},
          {"noise_variance", cfg.field.hyperparams.noise_variance}}},
        {"targets", targets},
        {"target_size", cfg.field.target_size},
        {"threshold", cfg.field.threshold}}},
      {"sensing",
       {{"fov_deg", json::array({s.camera.fov_along_deg, s.camera.fov_cross_deg})},
        {"frequency", s.camera.frequency},
        {"noise", {{"A", s.noise.A}, {"B", s.noise.B}}},
        {"performance", {{"h_opt", s.performance.h_opt}, {"sigma1", s.performance.sigma1}, {"h_sat", s.performance.h_sat}}},
        {"false_positive",
         {{"enabled", s.false_positive.enabled},
          {"probability", s.false_positive.probability},
          {"offset", s.false_positive.offset}}},
        {"altitude_recall", s.altitude_recall}}},
      {"objective", {{"k1", cfg.weights.k1}, {"k2", cfg.weights.k2}, {"kappa", cfg.weights.kappa}}},
      {"optimizer",
       {{"nbv_samples", cfg.optimizer.nbv_samples},
        {"population", cfg.optimizer.population},
        {"sigma0", cfg.optimizer.sigma0},
        {"max_evaluations", cfg.optimizer.max_evaluations},
        {"view_stride", cfg.optimizer.view_stride},
        {"f_tolerance", cfg.optimizer.f_tolerance}}},
      {"limits", {{"v_ref", cfg.limits.v_ref}, {"a_ref", cfg.limits.a_ref}}},
      {"mission",
       {{"budget", cfg.budget},
        {"planner", to_string(cfg.planner)},
        {"waypoints", cfg.waypoints},
        {"r_uav", cfg.r_uav},
        {"collision_sample_spacing", cfg.collision_sample_spacing},
        {"start", vec_json(cfg.start)},
        {"retry_cap", cfg.retry_cap},
        {"bin_width", cfg.bin_width},
        {"lawnmower_altitude", cfg.lawnmower_altitude},
        {"lawnmower_speed", cfg.lawnmower_speed}}},
  };
}

/// Builds a config from JSON; absent keys keep their defaults.
inline MissionConfig config_from_json(const json& root) {
  using detail::Reader;
  MissionConfig cfg;
  Reader top(root, "config");
  top.get("seed", cfg.seed);

  {
    Reader w = top.child("world");
    if (w.has("bounds")) {
      Reader b = w.child("bounds");
      b.get("min", cfg.world.bounds.min);
      b.get("max", cfg.world.bounds.max);
      b.finish();
    }
    w.get("voxel_size", cfg.world.voxel_size);
    w.get("include_bounds", cfg.world.include_bounds);
    if (w.has("obstacles")) {
      const json& list = w.raw("obstacles");
      if (!list.is_array()) throw ConfigError(w.where("obstacles") + ": expected an array");
      cfg.world.obstacles.clear();
      for (std::size_t i = 0; i < list.size(); ++i) {
        Reader o(list[i], w.where("obstacles") + "[" + std::to_string(i) + "]");
        BoxObstacle box;
        if (!list[i].contains("min") || !list[i].contains("max")) {
          throw ConfigError(w.where("obstacles") + "[" + std::to_string(i) + "]: needs min and max");
        }
        o.get("min", box.min_corner);
        o.get("max", box.max_corner);
        o.finish();
        cfg.world.obstacles.push_back(box);
      }
    }
    w.finish();
  }
  {
    Reader f = top.child("field");
    f.get("resolution", cfg.field.resolution);
    f.get("extent", cfg.field.extent);
    f.get("origin", cfg.field.origin);
    f.get("prior_mean", cfg.field.prior_mean);
    f.get("threshold", cfg.field.threshold);
    f.get("target_size", cfg.field.target_size);
    {
      Reader h = f.child("hyperparams");
      h.get("lengthscale", cfg.field.hyperparams.lengthscale);
      h.get("signal_variance", cfg.field.hyperparams.signal_variance);
      h.get("noise_variance", cfg.field.hyperparams.noise_variance);
      h.finish();
    }
    if (f.has("targets")) {
      const json& list = f.raw("targets");
      if (!list.is_array()) throw ConfigError(f.where("targets") + ": expected an array");
      cfg.field.targets.clear();
      for (std::size_t i = 0; i < list.size(); ++i) {
        const auto v = Reader::numbers(list[i], f.where("targets") + "[" + std::to_string(i) + "]", 2);
        cfg.field.targets.emplace_back(v[0], v[1]);
      }
    }
    f.finish();
  }
  {
    Reader s = top.child("sensing");
    if (s.has("fov_deg")) {
      const auto v = Reader::numbers(s.raw("fov_deg"), s.where("fov_deg"), 2);
      cfg.sensing.camera.fov_along_deg = v[0];
      cfg.sensing.camera.fov_cross_deg = v[1];
    }
    s.get("frequency", cfg.sensing.camera.frequency);
    {
      Reader n = s.child("noise");
      n.get("A", cfg.sensing.noise.A);
      n.get("B", cfg.sensing.noise.B);
      n.finish();
    }
    {
      Reader p = s.child("performance");
      p.get("h_opt", cfg.sensing.performance.h_opt);
      p.get("sigma1", cfg.sensing.performance.sigma1);
      p.get("h_sat", cfg.sensing.performance.h_sat);
      p.finish();
    }
    {
      Reader fp = s.child("false_positive");
      fp.get("enabled", cfg.sensing.false_positive.enabled);
      fp.get("probability", cfg.sensing.false_positive.probability);
      fp.get("offset", cfg.sensing.false_positive.offset);
      fp.finish();
    }
    s.get("altitude_recall", cfg.sensing.altitude_recall);
    s.finish();
  }
  {
    Reader o = top.child("objective");
    o.get("k1", cfg.weights.k1);
    o.get("k2", cfg.weights.k2);
    o.get("kappa", cfg.weights.kappa);
    o.finish();
  }
  {
    Reader o = top.child("optimizer");
    o.get("nbv_samples", cfg.optimizer.nbv_samples);
    o.get("population", cfg.optimizer.population);
    o.get("sigma0", cfg.optimizer.sigma0);
    o.get("max_evaluations", cfg.optimizer.max_evaluations);
    o.get("view_stride", cfg.optimizer.view_stride);
    o.get("f_tolerance", cfg.optimizer.f_tolerance);
    o.finish();
  }
  {
    Reader l = top.child("limits");
    l.get("v_ref", cfg.limits.v_ref);
    l.get("a_ref", cfg.limits.a_ref);
    l.finish();
  }
  {
    Reader m = top.child("mission");
    m.get("budget", cfg.budget);
    std::string planner = to_string(cfg.planner);
    m.get("planner", planner);
    const auto kind = parse_planner(planner);
    if (!kind) throw ConfigError(m.where("planner") + ": unknown planner '" + planner + "'");
    cfg.planner = *kind;
    m.get("waypoints", cfg.waypoints);
    m.get("r_uav", cfg.r_uav);
    m.get("collision_sample_spacing", cfg.collision_sample_spacing);
    m.get("start", cfg.start);
    m.get("retry_cap", cfg.retry_cap);
    m.get("bin_width", cfg.bin_width);
    m.get("lawnmower_altitude", cfg.lawnmower_altitude);
    m.get("lawnmower_speed", cfg.lawnmower_speed);
    m.finish();
  }
  top.finish();
  cfg.validate();
  return cfg;
}

/// Parses config text. JSON syntax errors are reported with line and column.
inline MissionConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream msg;
    msg << "line " << line << ", column " << col << ": " << e.what();
    throw ConfigError(msg.str());
  }
  return config_from_json(root);
}

inline MissionConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config(buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Scenarios

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"benchmark", "density-low", "density-high", "narrow"};
  return names;
}

/// 30 x 30 x 26 m world, one 4 x 10 x 26 m building and seven targets on the
/// lower half of the field.
inline MissionConfig benchmark_scenario() {
  MissionConfig cfg;
  cfg.world.obstacles = {BoxObstacle{Vec3(13.0, 16.0, 0.0), Vec3(17.0, 26.0, 26.0)}};
  cfg.field.targets = {Vec2(5.6, 3.4), Vec2(9.4, 10.1), Vec2(13.9, 6.4), Vec2(18.4, 12.4),
                       Vec2(22.1, 4.9), Vec2(25.9, 9.4), Vec2(3.4, 13.1)};
  cfg.start = Vec3(3.0, 27.0, 10.0);
  return cfg;
}

/// `count` randomly placed, non-overlapping 4 x 4 x `height` boxes in the
/// 30 x 30 m area, plus seven targets on free ground. `layout_seed` fixes the
/// placement.
inline MissionConfig density_scenario(int count, double height, std::uint64_t layout_seed) {
  if (count < 0) throw ConfigError("obstacle count must be >= 0");
  MissionConfig cfg;
  cfg.start = Vec3(2.0, 2.0, 10.0);
  std::mt19937_64 rng(layout_seed);
  const double size = 4.0;
  const Vec3 hi = cfg.world.bounds.max;
  std::uniform_real_distribution<double> ux(0.0, hi.x() - size);
  std::uniform_real_distribution<double> uy(0.0, hi.y() - size);
  const double gap = 1.0;
  int attempts = 0;
  while (static_cast<int>(cfg.world.obstacles.size()) < count) {
    if (++attempts > 100000) throw ConfigError("cannot place " + std::to_string(count) + " obstacles");
    const double x = ux(rng);
    const double y = uy(rng);
    const BoxObstacle box{Vec3(x, y, 0.0), Vec3(x + size, y + size, height)};
    // keep the start column clear
    const Vec2 s = cfg.start.head<2>();
    if (s.x() > x - 2.0 && s.x() < x + size + 2.0 && s.y() > y - 2.0 && s.y() < y + size + 2.0) continue;
    bool overlaps = false;
    for (const auto& other : cfg.world.obstacles) {
      if (x < other.max_corner.x() + gap && x + size + gap > other.min_corner.x() &&
          y < other.max_corner.y() + gap && y + size + gap > other.min_corner.y()) {
        overlaps = true;
        break;
      }
    }
    if (!overlaps) cfg.world.obstacles.push_back(box);
  }
  std::uniform_real_distribution<double> tx(0.5, hi.x() - 0.5);
  std::uniform_real_distribution<double> ty(0.5, hi.y() - 0.5);
  while (cfg.field.targets.size() < 7) {
    const Vec2 t(tx(rng), ty(rng));
    bool covered = false;
    for (const auto& box : cfg.world.obstacles) {
      if (t.x() >= box.min_corner.x() - 0.75 && t.x() <= box.max_corner.x() + 0.75 &&
          t.y() >= box.min_corner.y() - 0.75 && t.y() <= box.max_corner.y() + 0.75) {
        covered = true;
      }
    }
    if (!covered) cfg.field.targets.push_back(t);
  }
  return cfg;
}

/// Two high-rising buildings forming a 4 m corridor.
inline MissionConfig narrow_scenario() {
  MissionConfig cfg;
  cfg.world.obstacles = {BoxObstacle{Vec3(8.0, 4.0, 0.0), Vec3(13.0, 26.0, 26.0)},
                         BoxObstacle{Vec3(17.0, 4.0, 0.0), Vec3(22.0, 26.0, 26.0)}};
  cfg.field.targets = {Vec2(15.1, 20.3), Vec2(15.4, 9.8), Vec2(4.1, 12.2), Vec2(25.7, 17.6),
                       Vec2(5.3, 27.9), Vec2(24.6, 2.2), Vec2(15.0, 1.6)};
  cfg.start = Vec3(15.0, 1.5, 10.0);
  return cfg;
}

/// Named scenario. `count` applies to the density scenarios (default 15).
inline MissionConfig make_scenario(const std::string& name, int count = 15, std::uint64_t layout_seed = 0) {
  if (name == "benchmark") return benchmark_scenario();
  if (name == "density-low") return density_scenario(count, 13.0, layout_seed);
  if (name == "density-high") return density_scenario(count, 26.0, layout_seed);
  if (name == "narrow") return narrow_scenario();
  throw ConfigError("unknown scenario '" + name + "'");
}

}  // namespace oaipp
