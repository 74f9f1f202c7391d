// Timed waypoint trajectories built from rest-to-rest quintic segments.
//
// Each segment moves along the straight line between two control waypoints
// with the minimum-jerk profile s(tau) = 10 tau^3 - 15 tau^4 + 6 tau^5, which
// has zero velocity and acceleration at both ends. Segment durations come from
// a trapezoidal (or triangular, for short hops) velocity profile.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "oaipp/types.hpp"

namespace oaipp {

struct SpeedLimits {
  double v_ref = 5.0;  // m/s
  double a_ref = 3.0;  // m/s^2
};

/// Polynomial order of every segment.
inline constexpr int kSplineOrder = 5;

/// Duration assigned to a zero-length segment.
inline constexpr double kMinSegmentDuration = 0.01;

/// Time needed to cover `length` meters from rest to rest under a trapezoidal
/// velocity profile, falling back to a triangular profile when v_ref is never
/// reached.
inline double segment_duration(double length, const SpeedLimits& lim) {
  if (lim.v_ref <= 0.0 || lim.a_ref <= 0.0) {
    throw ConfigError("speed limits must be positive");
  }
  if (length <= 0.0) return kMinSegmentDuration;
  const double ramp_distance = lim.v_ref * lim.v_ref / lim.a_ref;
  double t = 0.0;
  if (length >= ramp_distance) {
    t = length / lim.v_ref + lim.v_ref / lim.a_ref;
  } else {
    t = 2.0 * std::sqrt(length / lim.a_ref);
  }
  return std::max(t, kMinSegmentDuration);
}

/// One rest-to-rest quintic between two waypoints.
struct QuinticSegment {
  Vec3 start;
  Vec3 end;
  double duration = kMinSegmentDuration;

  static double profile(double tau) {
    return tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau));
  }
  static double profile_rate(double tau) {
    return 30.0 * tau * tau * (1.0 - tau) * (1.0 - tau);
  }

  [[nodiscard]] Vec3 position(double t) const {
    const double tau = std::clamp(t / duration, 0.0, 1.0);
    const double s = profile(tau);
    // Written as a convex combination so s = 0 and s = 1 reproduce the
    // endpoints bit-exactly.
    return (1.0 - s) * start + s * end;
  }

  [[nodiscard]] Vec3 velocity(double t) const {
    const double tau = std::clamp(t / duration, 0.0, 1.0);
    return (end - start) * (profile_rate(tau) / duration);
  }

  [[nodiscard]] double length() const { return (end - start).norm(); }
};

class Trajectory {
 public:
  Trajectory() = default;

  Trajectory(Waypoints waypoints, std::vector<QuinticSegment> segments)
      : waypoints_(std::move(waypoints)), segments_(std::move(segments)) {}

  [[nodiscard]] const Waypoints& waypoints() const { return waypoints_; }
  [[nodiscard]] const std::vector<QuinticSegment>& segments() const {
    return segments_;
  }

  [[nodiscard]] double total_time() const {
    double t = 0.0;
    for (const auto& s : segments_) t += s.duration;
    return t;
  }

  [[nodiscard]] Vec3 position(double t) const {
    if (segments_.empty()) {
      return waypoints_.empty() ? Vec3::Zero() : waypoints_.front();
    }
    if (t <= 0.0) return segments_.front().start;
    for (const auto& s : segments_) {
      if (t <= s.duration) return s.position(t);
      t -= s.duration;
    }
    return segments_.back().end;
  }

  [[nodiscard]] Vec3 velocity(double t) const {
    if (segments_.empty() || t <= 0.0 || t >= total_time()) return Vec3::Zero();
    for (const auto& s : segments_) {
      if (t <= s.duration) return s.velocity(t);
      t -= s.duration;
    }
    return Vec3::Zero();
  }

 private:
  Waypoints waypoints_;
  std::vector<QuinticSegment> segments_;
};

inline Trajectory plan_polynomial(const Waypoints& waypoints,
                                  const SpeedLimits& lim) {
  if (waypoints.size() < 2) {
    throw ConfigError("a trajectory needs at least two waypoints");
  }
  std::vector<QuinticSegment> segments;
  segments.reserve(waypoints.size() - 1);
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
    QuinticSegment seg{waypoints[i], waypoints[i + 1], 0.0};
    seg.duration = segment_duration(seg.length(), lim);
    segments.push_back(seg);
  }
  return Trajectory(waypoints, std::move(segments));
}

inline double flight_time(const Trajectory& traj) { return traj.total_time(); }

/// Position at time t; t outside [0, flight_time] clamps to the endpoints.
inline Vec3 sample_position(const Trajectory& traj, double t) {
  return traj.position(t);
}

/// Times phase, phase + 1/f, phase + 2/f, ... up to the flight time. A
/// nonzero phase continues a sensor clock that started before this trajectory.
inline std::vector<double> measurement_times(const Trajectory& traj,
                                             double frequency, double phase = 0.0) {
  if (frequency <= 0.0) throw ConfigError("measurement frequency must be > 0");
  const double total = traj.total_time();
  const double period = 1.0 / frequency;
  std::vector<double> times;
  for (std::size_t k = 0;; ++k) {
    const double t = phase + static_cast<double>(k) * period;
    if (t > total + 1e-9) break;
    times.push_back(std::min(t, total));
  }
  return times;
}

inline Waypoints measurement_poses(const Trajectory& traj, double frequency,
                                   double phase = 0.0) {
  Waypoints poses;
  for (double t : measurement_times(traj, frequency, phase)) {
    poses.push_back(traj.position(t));
  }
  return poses;
}

}  // namespace oaipp
