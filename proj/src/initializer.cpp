#include "dfto/initializer.hpp"

#include "dfto/costs.hpp"

#include <cmath>

namespace dfto {

namespace {

Scenario scaleScenario(const Scenario& s, double inv_length, double inv_time) {
  const double inv_speed = inv_length / inv_time;  // divide speeds by L/T
  Scenario out = s;
  for (UavState* st : {&out.initial_state, &out.final_state}) {
    st->position *= inv_length;
    st->speed *= inv_speed;
  }
  out.speed_min *= inv_speed;
  out.speed_max *= inv_speed;
  for (Obstacle& o : out.obstacles) {
    o.center *= inv_length;
    o.radius *= inv_length;
  }
  out.safe_distance *= inv_length;
  out.time_cost.window_min *= inv_time;
  out.time_cost.window_max *= inv_time;
  out.time_cost.fixed_duration *= inv_time;
  return out;
}

}  // namespace

Scenario normalizedScenario(const Scenario& scenario, const Scaling& scaling) {
  return scaleScenario(scenario, 1.0 / scaling.length, 1.0 / scaling.time);
}

Scenario denormalizedScenario(const Scenario& scenario,
                              const Scaling& scaling) {
  return scaleScenario(scenario, scaling.length, scaling.time);
}

double normalizedGravity(double gravity, const Scaling& scaling) {
  return gravity * scaling.time * scaling.time / scaling.length;
}

FlatTrajectory denormalizedTrajectory(const FlatTrajectory& traj,
                                      const Scaling& scaling) {
  FlatTrajectory out = traj;
  out.duration *= scaling.time;
  out.waypoints *= scaling.length;
  out.coeffs *= scaling.length;
  const double speed_scale = scaling.length / scaling.time;
  for (BoundaryState* b : {&out.start, &out.finish}) {
    b->position *= scaling.length;
    b->velocity *= speed_scale;
    b->acceleration *= speed_scale / scaling.time;
  }
  return out;
}

double minTurnRadius(const Scenario& scenario, double gravity) {
  const double lateral = std::max(scenario.ny_max, -scenario.ny_min);
  if (!(lateral > 0.0)) {
    throw InitFailureError("lateral load bounds do not allow turning");
  }
  return scenario.speed_min * scenario.speed_min / (gravity * lateral);
}

int chooseSegments(double path_length, double turn_radius, double gain) {
  const double n = gain * path_length / turn_radius;
  return std::max(2, static_cast<int>(std::llround(n)));
}

InitialGuess initialGuess(const Scenario& scenario,
                          const SolverConfig& config) {
  validateScenario(scenario);

  InitialGuess guess;
  const double radius = minTurnRadius(scenario, config.gravity);
  guess.path = dubins3d(scenario.initial_state, scenario.final_state, radius,
                        scenario.gamma_min, scenario.gamma_max);
  const double length = guess.path.length();
  if (!(length > 1e-9 * radius)) {
    throw InitFailureError("terminal states coincide; no path to optimize");
  }

  guess.scaling.length = length;
  guess.scaling.time = length / scenario.speed_max;
  guess.segments = (config.segments > 0)
                       ? config.segments
                       : chooseSegments(length, radius, config.segment_gain);
  guess.scenario = normalizedScenario(scenario, guess.scaling);
  guess.gravity = normalizedGravity(config.gravity, guess.scaling);

  const int n = guess.segments;
  const double h = guess.path.horizontalLength();
  guess.waypoints.resize(n - 1, 3);
  for (int j = 1; j < n; ++j) {
    guess.waypoints.row(j - 1) =
        (guess.path.position(h * j / n) / guess.scaling.length).transpose();
  }

  if (scenario.time_cost.mode == TimeCostMode::Fixed) {
    guess.log_duration =
        std::log(scenario.time_cost.fixed_duration / guess.scaling.time);
  } else if (scenario.time_cost.mode == TimeCostMode::Window) {
    // Start inside the window when the unit duration falls outside it.
    const double lo = scenario.time_cost.window_min / guess.scaling.time;
    const double hi = scenario.time_cost.window_max / guess.scaling.time;
    guess.log_duration = std::log(std::clamp(1.0, lo, hi));
  } else {
    guess.log_duration = 0.0;  // duration = path length / speed_max
  }
  return guess;
}

}  // namespace dfto
