#include "dfto/flat_dynamics.hpp"

#include <cmath>

namespace dfto {

namespace {
const Eigen::Vector3d kDown(0.0, 0.0, 1.0);  // e3 in NED
}

Eigen::Vector3d stateVelocity(const UavState& state) {
  const double cg = std::cos(state.flight_path_angle);
  const double sg = std::sin(state.flight_path_angle);
  return state.speed * Eigen::Vector3d(cg * std::cos(state.heading),
                                       cg * std::sin(state.heading), -sg);
}

bool trySpeedFrame(const Eigen::Vector3d& velocity,
                   const Eigen::Vector3d& acceleration, double gravity,
                   double v_eps, FrameVectors& out) noexcept {
  out.speed = velocity.norm();
  if (out.speed < v_eps) return false;
  out.w2 = kDown.cross(velocity);
  out.w2_norm = out.w2.norm();
  if (out.w2_norm < v_eps) return false;
  out.w3 = velocity.cross(out.w2);
  out.w3_norm = out.speed * out.w2_norm;  // v is orthogonal to w2
  out.r1 = velocity / out.speed;
  out.r2 = out.w2 / out.w2_norm;
  out.r3 = out.w3 / out.w3_norm;
  out.load_vector = acceleration / gravity - kDown;
  return true;
}

FrameVectors speedFrame(const Eigen::Vector3d& velocity,
                        const Eigen::Vector3d& acceleration, double gravity,
                        double v_eps) {
  FrameVectors out;
  if (!trySpeedFrame(velocity, acceleration, gravity, v_eps, out)) {
    if (velocity.norm() < v_eps) {
      throw SingularVelocityError("speed frame undefined: ||v|| < v_eps");
    }
    throw SingularVerticalError(
        "speed frame undefined: vertical flight, ||e3 x v|| < v_eps");
  }
  return out;
}

UavState mapState(const FlatPoint& point, double v_eps) {
  const double speed = point.velocity.norm();
  if (speed < v_eps) {
    throw SingularVelocityError("state map undefined: ||v|| < v_eps");
  }
  UavState state;
  state.position = point.position;
  state.speed = speed;
  state.heading = std::atan2(point.velocity.y(), point.velocity.x());
  state.flight_path_angle = -std::asin(point.velocity.z() / speed);
  return state;
}

LoadControls mapControls(const FlatPoint& point, double gravity, double v_eps) {
  const FrameVectors f =
      speedFrame(point.velocity, point.acceleration, gravity, v_eps);
  LoadControls u;
  u.nx = f.load_vector.dot(f.r1);
  u.ny = f.load_vector.dot(f.r2);
  u.nz = -f.load_vector.dot(f.r3);
  return u;
}

FlatPoint inverseMap(const UavState& state, const LoadControls& controls,
                     double gravity) {
  FlatPoint point;
  point.position = state.position;
  point.velocity = stateVelocity(state);
  // a = g * (nx r1 + ny r2 - nz r3) + g e3, with the frame written in terms of
  // the heading/flight-path angles (valid even at the zero-lateral singularity
  // of the forward map's cross products).
  const double cc = std::cos(state.heading);
  const double sc = std::sin(state.heading);
  const double cg = std::cos(state.flight_path_angle);
  const double sg = std::sin(state.flight_path_angle);
  const Eigen::Vector3d r1(cg * cc, cg * sc, -sg);
  const Eigen::Vector3d r2(-sc, cc, 0.0);
  const Eigen::Vector3d r3(sg * cc, sg * sc, cg);
  point.acceleration =
      gravity * (controls.nx * r1 + controls.ny * r2 - controls.nz * r3) +
      gravity * kDown;
  return point;
}

PhysicalControls physicalControls(const LoadControls& controls, double mass_kg,
                                  double gravity, const DragModel& drag,
                                  const UavState& state) {
  if (controls.ny == 0.0 && controls.nz == 0.0) {
    throw ZeroNormalLoadError("bank angle undefined: ny = nz = 0");
  }
  PhysicalControls out;
  out.thrust = controls.nx * mass_kg * gravity + drag.force(state);
  out.lift = mass_kg * gravity *
             std::sqrt(controls.ny * controls.ny + controls.nz * controls.nz);
  out.bank_angle = std::atan2(controls.ny, controls.nz);
  return out;
}

}  // namespace dfto
