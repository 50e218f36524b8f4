#pragma once

#include "dfto/types.hpp"

namespace dfto {

// Velocity vector of a state: V * [cos(gamma)cos(chi), cos(gamma)sin(chi), -sin(gamma)].
Eigen::Vector3d stateVelocity(const UavState& state);

// Speed-frame axes from (v, a). Returns false without touching error state when
// ||v|| < v_eps or ||e3 x v|| < v_eps; out is fully populated otherwise.
bool trySpeedFrame(const Eigen::Vector3d& velocity,
                   const Eigen::Vector3d& acceleration, double gravity,
                   double v_eps, FrameVectors& out) noexcept;

// Throwing wrapper around trySpeedFrame.
FrameVectors speedFrame(const Eigen::Vector3d& velocity,
                        const Eigen::Vector3d& acceleration,
                        double gravity = kDefaultGravity,
                        double v_eps = kVelocityEps);

// Position/velocity -> kinematic state. Throws SingularVelocityError when
// ||v|| < v_eps.
UavState mapState(const FlatPoint& point, double v_eps = kVelocityEps);

// Velocity/acceleration -> load factors via the speed frame. Throws on the
// frame singularities.
LoadControls mapControls(const FlatPoint& point, double gravity = kDefaultGravity,
                         double v_eps = kVelocityEps);

// State + loads -> flat point (position, velocity, acceleration; jerk is left
// zero, the map does not constrain it).
FlatPoint inverseMap(const UavState& state, const LoadControls& controls,
                     double gravity = kDefaultGravity);

// Drag force along -r1; the solver itself never needs it, it only enters the
// thrust readout below.
class DragModel {
 public:
  virtual ~DragModel() = default;
  virtual double force(const UavState& state) const = 0;
};

class ZeroDrag final : public DragModel {
 public:
  double force(const UavState&) const override { return 0.0; }
};

class ConstantDrag final : public DragModel {
 public:
  explicit ConstantDrag(double newtons) : newtons_(newtons) {}
  double force(const UavState&) const override { return newtons_; }

 private:
  double newtons_;
};

// Thrust / lift / bank angle from load factors. Throws ZeroNormalLoadError when
// ny = nz = 0 (bank undefined).
PhysicalControls physicalControls(const LoadControls& controls, double mass_kg,
                                  double gravity = kDefaultGravity,
                                  const DragModel& drag = ZeroDrag(),
                                  const UavState& state = UavState());

}  // namespace dfto
