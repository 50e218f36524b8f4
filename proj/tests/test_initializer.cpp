#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dfto/initializer.hpp"
#include "dfto/optimizer.hpp"
#include "dfto/spline.hpp"

using namespace dfto;

namespace {

double angleGap(double a, double b) {
  return std::abs(std::remainder(a - b, 2.0 * M_PI));
}

Scenario climbScenario() {
  Scenario s;
  s.initial_state.position = {0.0, 0.0, -500.0};
  s.initial_state.speed = 35.0;
  s.initial_state.heading = 0.3;
  s.final_state.position = {4000.0, 1500.0, -650.0};
  s.final_state.speed = 35.0;
  s.final_state.heading = -1.1;
  s.obstacles.push_back({{2000.0, 700.0}, 250.0});
  return s;
}

}  // namespace

TEST_CASE("planar turn-straight-turn paths reconstruct both endpoints") {
  const double radius = 450.0;
  const Pose2 cases[][2] = {
      {{{0.0, 0.0}, 0.0}, {{3000.0, 1000.0}, 1.2}},
      {{{0.0, 0.0}, 2.8}, {{-1500.0, 2200.0}, -2.5}},
      {{{100.0, -50.0}, -0.4}, {{900.0, 300.0}, 3.0}},
      // Goal well inside one turn diameter: forces a three-turn word.
      {{{0.0, 0.0}, 0.0}, {{350.0, 120.0}, 2.9}},
  };
  for (const auto& pair : cases) {
    const DubinsPath2 path = dubinsShortest(pair[0], pair[1], radius);
    CHECK(path.length() >=
          (pair[1].position - pair[0].position).norm() - 1e-9);

    const Pose2 at_start = path.sample(0.0);
    CHECK((at_start.position - pair[0].position).norm() < 1e-6);
    CHECK(angleGap(at_start.heading, pair[0].heading) < 1e-6);

    const Pose2 at_end = path.sample(path.length());
    CHECK((at_end.position - pair[1].position).norm() < 1e-6);
    CHECK(angleGap(at_end.heading, pair[1].heading) < 1e-6);
  }
}

TEST_CASE("planar path closed forms: straight run and U-turn") {
  const double radius = 200.0;

  const DubinsPath2 straight =
      dubinsShortest({{0.0, 0.0}, 0.0}, {{1500.0, 0.0}, 0.0}, radius);
  CHECK(straight.length() == doctest::Approx(1500.0).epsilon(1e-9));

  // Same point on the other side of one turn diameter, heading reversed:
  // a single half-circle of arc pi*R.
  const DubinsPath2 u_turn = dubinsShortest(
      {{0.0, 0.0}, 0.0}, {{0.0, 2.0 * radius}, M_PI}, radius);
  CHECK(u_turn.length() == doctest::Approx(M_PI * radius).epsilon(1e-9));

  const DubinsPath2 degenerate =
      dubinsShortest({{5.0, 5.0}, 1.0}, {{5.0, 5.0}, 1.0}, radius);
  CHECK(degenerate.length() == doctest::Approx(0.0));
}

TEST_CASE("gentle climbs keep the shortest horizontal path and a linear altitude") {
  UavState start;
  start.position = {0.0, 0.0, -500.0};
  start.heading = 0.0;
  UavState goal;
  goal.position = {3000.0, 400.0, -550.0};
  goal.heading = 0.5;

  const double radius = 450.0;
  const double gamma_lim = 10.0 * M_PI / 180.0;
  const DubinsPath3 path = dubins3d(start, goal, radius, -gamma_lim, gamma_lim);

  const DubinsPath2 flat = dubinsShortest(
      {start.position.head<2>(), start.heading},
      {goal.position.head<2>(), goal.heading}, radius);
  CHECK(path.horizontalLength() ==
        doctest::Approx(flat.length()).epsilon(1e-12));

  CHECK((path.position(0.0) - start.position).norm() < 1e-6);
  CHECK((path.position(path.horizontalLength()) - goal.position).norm() <
        1e-6);

  // Altitude is linear in horizontal arc length.
  const double h = path.horizontalLength();
  for (const double f : {0.2, 0.5, 0.85}) {
    CHECK(path.position(f * h).z() ==
          doctest::Approx(-500.0 + f * (-550.0 + 500.0)).epsilon(1e-9));
  }
}

TEST_CASE("steep climbs stretch the path with whole extra turns") {
  UavState start;
  start.position = {0.0, 0.0, -500.0};
  start.heading = 0.0;
  UavState goal;
  goal.position = {800.0, 0.0, -900.0};  // 400 m climb, ~800 m across
  goal.heading = 0.0;

  const double radius = 450.0;
  const double gamma_lim = 10.0 * M_PI / 180.0;
  const DubinsPath3 path = dubins3d(start, goal, radius, -gamma_lim, gamma_lim);

  const double h = path.horizontalLength();
  const double climb = 400.0;
  const double gamma = std::atan2(climb, h);
  CHECK(gamma <= gamma_lim + 1e-9);

  const double h_flat =
      dubinsShortest({start.position.head<2>(), start.heading},
                     {goal.position.head<2>(), goal.heading}, radius)
          .length();
  CHECK(h > h_flat);
  const double extra_turns = (h - h_flat) / (2.0 * M_PI * radius);
  CHECK(extra_turns == doctest::Approx(std::round(extra_turns)).epsilon(1e-9));
  CHECK(std::round(extra_turns) >= 1.0);

  CHECK((path.position(0.0) - start.position).norm() < 1e-6);
  CHECK((path.position(h) - goal.position).norm() < 1e-6);
}

TEST_CASE("a climb with no usable flight-path bound is rejected") {
  UavState start;
  start.position = {0.0, 0.0, -500.0};
  UavState goal;
  goal.position = {800.0, 0.0, -900.0};  // needs gamma > 0
  CHECK_THROWS_AS(dubins3d(start, goal, 450.0, -0.17, 0.0), InitFailureError);
}

TEST_CASE("normalization round-trips a full scenario") {
  Scenario s = climbScenario();
  s.time_cost.mode = TimeCostMode::Window;
  s.time_cost.window_min = 100.0;
  s.time_cost.window_max = 200.0;

  const Scaling scaling{5000.0, 150.0};
  const Scenario normalized = normalizedScenario(s, scaling);
  const Scenario back = denormalizedScenario(normalized, scaling);

  CHECK((back.initial_state.position - s.initial_state.position).norm() <
        1e-12);
  CHECK((back.final_state.position - s.final_state.position).norm() < 1e-12);
  CHECK(back.initial_state.speed == doctest::Approx(s.initial_state.speed));
  CHECK(back.speed_min == doctest::Approx(s.speed_min).epsilon(1e-12));
  CHECK(back.speed_max == doctest::Approx(s.speed_max).epsilon(1e-12));
  CHECK(back.safe_distance == doctest::Approx(s.safe_distance).epsilon(1e-12));
  REQUIRE(back.obstacles.size() == s.obstacles.size());
  CHECK((back.obstacles[0].center - s.obstacles[0].center).norm() < 1e-12);
  CHECK(back.obstacles[0].radius ==
        doctest::Approx(s.obstacles[0].radius).epsilon(1e-12));
  CHECK(back.time_cost.window_min ==
        doctest::Approx(s.time_cost.window_min).epsilon(1e-12));
  CHECK(back.time_cost.window_max ==
        doctest::Approx(s.time_cost.window_max).epsilon(1e-12));

  // Angles and load factors are dimensionless, so normalization is identity.
  CHECK(normalized.gamma_min == s.gamma_min);
  CHECK(normalized.gamma_max == s.gamma_max);
  CHECK(normalized.ny_max == s.ny_max);
  CHECK(normalized.initial_state.heading == s.initial_state.heading);

  // Spot values: speeds divide by length/time, lengths by length.
  CHECK(normalized.speed_max ==
        doctest::Approx(40.0 * 150.0 / 5000.0).epsilon(1e-12));
  CHECK(normalized.obstacles[0].radius ==
        doctest::Approx(250.0 / 5000.0).epsilon(1e-12));
  CHECK(normalized.time_cost.window_min ==
        doctest::Approx(100.0 / 150.0).epsilon(1e-12));
}

TEST_CASE("gravity normalizes by time squared over length") {
  const Scaling scaling{5000.0, 150.0};
  CHECK(normalizedGravity(9.80665, scaling) ==
        doctest::Approx(9.80665 * 150.0 * 150.0 / 5000.0).epsilon(1e-15));
}

TEST_CASE("trajectories denormalize with consistent derivatives") {
  const int n = 4;
  SplineSystem system(n);
  Eigen::MatrixXd waypoints(n - 1, 3);
  waypoints << 0.2, 0.1, -0.05,
               0.5, 0.15, -0.1,
               0.8, 0.05, -0.12;
  BoundaryState start;
  start.position = {0.0, 0.0, 0.0};
  start.velocity = {1.0, 0.0, 0.0};
  BoundaryState finish;
  finish.position = {1.0, 0.0, -0.15};
  finish.velocity = {0.9, 0.2, 0.0};
  const FlatTrajectory unit =
      buildTrajectory(system, start, finish, waypoints, 1.0);

  const Scaling scaling{4000.0, 120.0};
  const FlatTrajectory physical = denormalizedTrajectory(unit, scaling);
  CHECK(physical.duration ==
        doctest::Approx(120.0 * unit.duration).epsilon(1e-12));

  const double speed_scale = scaling.length / scaling.time;
  for (const double f : {0.0, 0.3, 0.77, 1.0}) {
    const double t_unit = f * unit.duration;
    const double t_phys = f * physical.duration;
    CHECK((physical.derivative(t_phys, 0) -
           scaling.length * unit.derivative(t_unit, 0))
              .norm() < 1e-9 * scaling.length);
    CHECK((physical.derivative(t_phys, 1) -
           speed_scale * unit.derivative(t_unit, 1))
              .norm() < 1e-9 * speed_scale);
    CHECK((physical.derivative(t_phys, 2) -
           (speed_scale / scaling.time) * unit.derivative(t_unit, 2))
              .norm() < 1e-9);
  }
}

TEST_CASE("tightest turn radius follows the lateral load bound") {
  Scenario s = climbScenario();
  CHECK(minTurnRadius(s, kDefaultGravity) ==
        doctest::Approx(30.0 * 30.0 / (kDefaultGravity * 0.2)).epsilon(1e-12));

  s.ny_max = 0.1;
  s.ny_min = -0.3;  // the larger magnitude side governs
  CHECK(minTurnRadius(s, kDefaultGravity) ==
        doctest::Approx(30.0 * 30.0 / (kDefaultGravity * 0.3)).epsilon(1e-12));

  s.ny_max = 0.0;
  s.ny_min = 0.0;
  CHECK_THROWS_AS(minTurnRadius(s, kDefaultGravity), InitFailureError);
}

TEST_CASE("segment count grows with path length over turn radius") {
  CHECK(chooseSegments(1000.0, 458.0, 1.25) == 3);   // round(2.729)
  CHECK(chooseSegments(100.0, 458.0, 1.25) == 2);    // floor of 2
  CHECK(chooseSegments(10000.0, 458.0, 1.25) == 27); // round(27.29)
}

TEST_CASE("warm start wires scaling, segments, waypoints, and duration together") {
  const Scenario s = climbScenario();
  const SolverConfig config;
  const InitialGuess guess = initialGuess(s, config);

  CHECK(guess.scaling.length ==
        doctest::Approx(guess.path.length()).epsilon(1e-12));
  CHECK(guess.scaling.time ==
        doctest::Approx(guess.scaling.length / s.speed_max).epsilon(1e-12));
  CHECK(guess.segments ==
        chooseSegments(guess.path.length(),
                       minTurnRadius(s, config.gravity), config.segment_gain));
  CHECK(guess.waypoints.rows() == guess.segments - 1);
  CHECK(guess.waypoints.cols() == 3);
  CHECK(guess.log_duration == 0.0);
  CHECK(guess.gravity ==
        doctest::Approx(normalizedGravity(config.gravity, guess.scaling)));
  CHECK(guess.scenario.speed_max == doctest::Approx(1.0).epsilon(1e-12));

  // Waypoints sit on the warm-start path, equally spaced in horizontal arc.
  const double h = guess.path.horizontalLength();
  for (int j = 1; j < guess.segments; ++j) {
    const Eigen::Vector3d on_path = guess.path.position(h * j / guess.segments);
    const Eigen::Vector3d scaled =
        guess.scaling.length * guess.waypoints.row(j - 1).transpose();
    CHECK((scaled - on_path).norm() < 1e-9 * guess.scaling.length);
  }

  // Explicit segment override wins.
  SolverConfig forced = config;
  forced.segments = 11;
  CHECK(initialGuess(s, forced).segments == 11);
}

TEST_CASE("warm-start duration honors fixed and window time specs") {
  Scenario s = climbScenario();
  const SolverConfig config;

  s.time_cost.mode = TimeCostMode::Fixed;
  s.time_cost.fixed_duration = 180.0;
  const InitialGuess fixed = initialGuess(s, config);
  CHECK(fixed.log_duration ==
        doctest::Approx(std::log(180.0 / fixed.scaling.time)).epsilon(1e-12));

  // A window the unit start already satisfies leaves the duration alone; a
  // window above it pulls the start up to the window floor.
  s.time_cost.mode = TimeCostMode::Window;
  s.time_cost.window_min = 0.0;
  s.time_cost.window_max = 1e6;
  CHECK(initialGuess(s, config).log_duration == 0.0);

  s.time_cost.window_min = 500.0;
  s.time_cost.window_max = 800.0;
  const InitialGuess windowed = initialGuess(s, config);
  CHECK(windowed.log_duration ==
        doctest::Approx(std::log(500.0 / windowed.scaling.time))
            .epsilon(1e-12));
}

TEST_CASE("coincident terminals seed a full loiter turn") {
  Scenario s = climbScenario();
  s.obstacles.clear();
  s.final_state = s.initial_state;

  const SolverConfig config;
  const InitialGuess guess = initialGuess(s, config);
  const double radius = minTurnRadius(s, config.gravity);
  CHECK(guess.path.horizontalLength() ==
        doctest::Approx(2.0 * M_PI * radius).epsilon(1e-9));

  const SolveResult result = solve(s, config);
  CHECK(result.report.feasible);
  // No loop can beat one lap of the tightest circle at full speed; the
  // optimum trades turn tightness against the lateral-load penalty, so the
  // flown lap is somewhat wider.
  CHECK(result.report.duration_s > 2.0 * M_PI * radius / (1.1 * s.speed_max));
  CHECK(result.report.duration_s < 300.0);
  const FlatTrajectory& traj = result.trajectory;
  CHECK((traj.derivative(0.0, 0) - traj.derivative(traj.duration, 0)).norm() <
        1e-6);
}

TEST_CASE("geometrically similar problems solve to scaled copies") {
  // Lengths x4 and speeds x2 leave every dimensionless quantity unchanged
  // (loads scale as V^2/L, turn radii as L), so the normalized problems are
  // identical and durations scale by exactly x2.
  Scenario base;
  base.initial_state.position = {0.0, 0.0, -400.0};
  base.initial_state.speed = 35.0;
  base.final_state.position = {2500.0, 900.0, -450.0};
  base.final_state.speed = 35.0;
  base.final_state.heading = 0.9;
  base.obstacles.push_back({{1300.0, 450.0}, 220.0});

  Scenario big = base;
  const double k = 4.0;
  const double vk = 2.0;  // sqrt(k), so V^2/L is preserved
  for (UavState* st : {&big.initial_state, &big.final_state}) {
    st->position *= k;
    st->speed *= vk;
  }
  big.speed_min *= vk;
  big.speed_max *= vk;
  big.safe_distance *= k;
  big.obstacles[0].center *= k;
  big.obstacles[0].radius *= k;

  const SolveResult small_run = solve(base);
  const SolveResult big_run = solve(big);
  REQUIRE(small_run.report.feasible);
  REQUIRE(big_run.report.feasible);
  CHECK(big_run.report.segments == small_run.report.segments);
  CHECK(big_run.report.iterations == small_run.report.iterations);
  CHECK(big_run.report.duration_s ==
        doctest::Approx(2.0 * small_run.report.duration_s).epsilon(1e-9));
}
