#pragma once

#include "dfto/types.hpp"

#include <array>

namespace dfto {

enum class DubinsWord { LSL, LSR, RSL, RSR, RLR, LRL };

struct Pose2 {
  Eigen::Vector2d position{Eigen::Vector2d::Zero()};
  double heading = 0.0;  // rad, from +x toward +y
};

// One of the six candidate paths: three segments of turn/straight/turn with a
// common turn radius. lengths are metric arc lengths.
struct DubinsPath2 {
  Pose2 start;
  double radius = 1.0;
  DubinsWord word = DubinsWord::LSL;
  std::array<double, 3> lengths{0.0, 0.0, 0.0};

  double length() const { return lengths[0] + lengths[1] + lengths[2]; }
  Pose2 sample(double s) const;  // s in [0, length()]
};

// Shortest of the six closed-form candidates. Coincident poses resolve to a
// full turn rather than an empty path, so the result is always flyable.
DubinsPath2 dubinsShortest(const Pose2& start, const Pose2& goal,
                           double radius);

// Horizontal Dubins path with altitude linear in horizontal arc length, so
// the flight-path angle is constant along it.
struct DubinsPath3 {
  DubinsPath2 horizontal;
  double z_start = 0.0;
  double z_end = 0.0;

  double horizontalLength() const { return horizontal.length(); }
  double length() const {  // 3D arc length
    const double h = horizontalLength();
    return std::hypot(h, z_end - z_start);
  }
  Eigen::Vector3d position(double s) const;  // s in [0, horizontalLength()]
};

// Shortest horizontal path between the state headings, stretched with full
// initial turns when the direct climb/descent would exceed the flight-path
// bounds. Throws InitFailureError when the required climb direction has no
// usable bound.
DubinsPath3 dubins3d(const UavState& start, const UavState& goal,
                     double radius, double gamma_min, double gamma_max);

}  // namespace dfto
