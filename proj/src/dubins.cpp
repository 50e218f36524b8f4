#include "dfto/dubins.hpp"

#include <cmath>
#include <limits>

namespace dfto {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

double mod2pi(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  return t;
}

enum class Seg { L, S, R };

constexpr Seg kSegments[6][3] = {
    {Seg::L, Seg::S, Seg::L},  // LSL
    {Seg::L, Seg::S, Seg::R},  // LSR
    {Seg::R, Seg::S, Seg::L},  // RSL
    {Seg::R, Seg::S, Seg::R},  // RSR
    {Seg::R, Seg::L, Seg::R},  // RLR
    {Seg::L, Seg::R, Seg::L},  // LRL
};

// Normalized candidate solutions (unit radius, lengths in angle/d units).
// Returns false when the word does not exist for this query.
bool solveWord(DubinsWord word, double alpha, double beta, double d,
               std::array<double, 3>& out) {
  const double sa = std::sin(alpha);
  const double sb = std::sin(beta);
  const double ca = std::cos(alpha);
  const double cb = std::cos(beta);
  const double cab = std::cos(alpha - beta);

  switch (word) {
    case DubinsWord::LSL: {
      const double p2 = 2.0 + d * d - 2.0 * cab + 2.0 * d * (sa - sb);
      if (p2 < 0.0) return false;
      const double tmp = std::atan2(cb - ca, d + sa - sb);
      out = {mod2pi(tmp - alpha), std::sqrt(p2), mod2pi(beta - tmp)};
      return true;
    }
    case DubinsWord::RSR: {
      const double p2 = 2.0 + d * d - 2.0 * cab + 2.0 * d * (sb - sa);
      if (p2 < 0.0) return false;
      const double tmp = std::atan2(ca - cb, d - sa + sb);
      out = {mod2pi(alpha - tmp), std::sqrt(p2), mod2pi(tmp - beta)};
      return true;
    }
    case DubinsWord::LSR: {
      const double p2 = -2.0 + d * d + 2.0 * cab + 2.0 * d * (sa + sb);
      if (p2 < 0.0) return false;
      const double p = std::sqrt(p2);
      const double tmp =
          std::atan2(-ca - cb, d + sa + sb) - std::atan2(-2.0, p);
      out = {mod2pi(tmp - alpha), p, mod2pi(tmp - beta)};
      return true;
    }
    case DubinsWord::RSL: {
      const double p2 = -2.0 + d * d + 2.0 * cab - 2.0 * d * (sa + sb);
      if (p2 < 0.0) return false;
      const double p = std::sqrt(p2);
      const double tmp =
          std::atan2(ca + cb, d - sa - sb) - std::atan2(2.0, p);
      out = {mod2pi(alpha - tmp), p, mod2pi(beta - tmp)};
      return true;
    }
    case DubinsWord::RLR: {
      const double tmp = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sa - sb)) / 8.0;
      if (std::abs(tmp) > 1.0) return false;
      const double p = mod2pi(kTwoPi - std::acos(tmp));
      const double t =
          mod2pi(alpha - std::atan2(ca - cb, d - sa + sb) + 0.5 * p);
      out = {t, p, mod2pi(alpha - beta - t + p)};
      return true;
    }
    case DubinsWord::LRL: {
      const double tmp = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sb - sa)) / 8.0;
      if (std::abs(tmp) > 1.0) return false;
      const double p = mod2pi(kTwoPi - std::acos(tmp));
      const double t =
          mod2pi(-alpha + std::atan2(cb - ca, d + sa - sb) + 0.5 * p);
      out = {t, p, mod2pi(mod2pi(beta) - alpha - t + mod2pi(p))};
      return true;
    }
  }
  return false;
}

Pose2 propagate(const Pose2& from, Seg seg, double s, double radius) {
  Pose2 to = from;
  switch (seg) {
    case Seg::L: {
      const double dth = s / radius;
      to.heading = from.heading + dth;
      to.position.x() += radius * (std::sin(to.heading) - std::sin(from.heading));
      to.position.y() += radius * (std::cos(from.heading) - std::cos(to.heading));
      break;
    }
    case Seg::R: {
      const double dth = s / radius;
      to.heading = from.heading - dth;
      to.position.x() += radius * (std::sin(from.heading) - std::sin(to.heading));
      to.position.y() += radius * (std::cos(to.heading) - std::cos(from.heading));
      break;
    }
    case Seg::S:
      to.position.x() += s * std::cos(from.heading);
      to.position.y() += s * std::sin(from.heading);
      break;
  }
  return to;
}

}  // namespace

Pose2 DubinsPath2::sample(double s) const {
  s = std::clamp(s, 0.0, length());
  Pose2 pose = start;
  const Seg* segs = kSegments[static_cast<int>(word)];
  for (int i = 0; i < 3; ++i) {
    const double len = std::min(s, lengths[i]);
    pose = propagate(pose, segs[i], len, radius);
    s -= len;
    if (s <= 0.0) break;
  }
  return pose;
}

DubinsPath2 dubinsShortest(const Pose2& start, const Pose2& goal,
                           double radius) {
  if (!(radius > 0.0)) {
    throw InitFailureError("turn radius must be positive");
  }
  const Eigen::Vector2d delta = goal.position - start.position;
  const double dist = delta.norm();
  const double d = dist / radius;
  const double theta = (dist > 0.0) ? std::atan2(delta.y(), delta.x()) : 0.0;
  const double alpha = mod2pi(start.heading - theta);
  const double beta = mod2pi(goal.heading - theta);

  DubinsPath2 best;
  best.start = start;
  best.radius = radius;
  double best_len = std::numeric_limits<double>::infinity();
  for (int w = 0; w < 6; ++w) {
    std::array<double, 3> n{};
    if (!solveWord(static_cast<DubinsWord>(w), alpha, beta, d, n)) continue;
    // Normalized lengths (turn angles and the straight's d) share the radius
    // scale.
    const std::array<double, 3> lengths = {n[0] * radius, n[1] * radius,
                                           n[2] * radius};
    const double total = lengths[0] + lengths[1] + lengths[2];
    if (total < best_len) {
      best_len = total;
      best.word = static_cast<DubinsWord>(w);
      best.lengths = lengths;
    }
  }
  if (!std::isfinite(best_len)) {
    throw InitFailureError("no admissible turn/straight/turn path found");
  }
  return best;
}

Eigen::Vector3d DubinsPath3::position(double s) const {
  const double h = horizontalLength();
  const Pose2 pose = horizontal.sample(s);
  const double frac = (h > 0.0) ? std::clamp(s / h, 0.0, 1.0) : 0.0;
  return {pose.position.x(), pose.position.y(),
          z_start + frac * (z_end - z_start)};
}

DubinsPath3 dubins3d(const UavState& start, const UavState& goal,
                     double radius, double gamma_min, double gamma_max) {
  DubinsPath3 path;
  path.z_start = start.position.z();
  path.z_end = goal.position.z();
  path.horizontal = dubinsShortest(
      {start.position.head<2>(), start.heading},
      {goal.position.head<2>(), goal.heading}, radius);

  // -dz over horizontal length is tan(gamma); stretch with full initial turns
  // until the constant flight-path angle fits the bounds.
  const double climb = -(path.z_end - path.z_start);  // positive going up
  double h = path.horizontalLength();
  double needed = 0.0;
  if (climb > 0.0) {
    if (!(gamma_max > 0.0)) {
      throw InitFailureError("climb required but gamma_max is not positive");
    }
    needed = climb / std::tan(gamma_max);
  } else if (climb < 0.0) {
    if (!(gamma_min < 0.0)) {
      throw InitFailureError("descent required but gamma_min is not negative");
    }
    needed = -climb / std::tan(-gamma_min);
  }
  if (needed > h) {
    const double circumference = kTwoPi * radius;
    const double turns = std::ceil((needed - h) / circumference);
    path.horizontal.lengths[0] += turns * circumference;
  }
  return path;
}

}  // namespace dfto
