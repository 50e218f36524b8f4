#pragma once

#include "dfto/dubins.hpp"
#include "dfto/spline.hpp"
#include "dfto/types.hpp"

namespace dfto {

// Problem scaling: lengths divide by `length`, times by `time`. Speeds then
// divide by length/time and gravity by length/time^2.
struct Scaling {
  double length = 1.0;
  double time = 1.0;
};

Scenario normalizedScenario(const Scenario& scenario, const Scaling& scaling);
Scenario denormalizedScenario(const Scenario& scenario, const Scaling& scaling);
double normalizedGravity(double gravity, const Scaling& scaling);
FlatTrajectory denormalizedTrajectory(const FlatTrajectory& traj,
                                      const Scaling& scaling);

// Tightest level-turn radius the scenario's bounds admit:
// speed_min^2 / (gravity * max lateral load).
double minTurnRadius(const Scenario& scenario, double gravity);

// max(2, round(gain * path_length / turn_radius)).
int chooseSegments(double path_length, double turn_radius, double gain);

struct InitialGuess {
  Scaling scaling;          // length = 3D path length, time = length/speed_max
  int segments = 0;
  Eigen::MatrixXd waypoints;  // normalized, (segments-1) x 3
  double log_duration = 0.0;  // normalized; ln of fixed duration when fixed
  Scenario scenario;          // normalized copy
  double gravity = 0.0;       // normalized
  DubinsPath3 path;           // physical, for inspection
};

// Builds the warm start: turn/straight/turn path between the terminal states,
// segment count from its length, waypoints equally spaced along it, unit
// normalized duration. Throws InitFailureError on degenerate inputs.
InitialGuess initialGuess(const Scenario& scenario, const SolverConfig& config);

}  // namespace dfto
