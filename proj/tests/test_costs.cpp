#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dfto/costs.hpp"
#include "dfto/flat_dynamics.hpp"

using namespace dfto;

namespace {

// 2 km of level flight at the band center with one cylinder offset from the
// straight line between the terminals.
Scenario levelScenario() {
  Scenario s;
  s.initial_state.position = {0.0, 0.0, -500.0};
  s.initial_state.speed = 35.0;
  s.final_state.position = {2000.0, 0.0, -500.0};
  s.final_state.speed = 35.0;
  s.obstacles.push_back({{750.0, 380.0}, 200.0});
  s.time_cost.mode = TimeCostMode::MinTime;
  return s;
}

Eigen::MatrixXd straightWaypoints(const Scenario& s, int n) {
  Eigen::MatrixXd w(n - 1, 3);
  for (int i = 1; i <= n - 1; ++i) {
    const double f = static_cast<double>(i) / n;
    w.row(i - 1) = ((1.0 - f) * s.initial_state.position +
                    f * s.final_state.position)
                       .transpose();
  }
  return w;
}

}  // namespace

TEST_CASE("duration is optimized through its logarithm") {
  CHECK(timeMapping(0.0) == doctest::Approx(1.0));
  CHECK(timeMapping(std::log(120.0)) == doctest::Approx(120.0));
  CHECK(timeMappingInverse(120.0) == doctest::Approx(std::log(120.0)));
  for (const double t : {0.3, 17.0, 512.0}) {
    CHECK(timeMapping(timeMappingInverse(t)) == doctest::Approx(t));
  }
}

TEST_CASE("cubic hinge and its derivative") {
  CHECK(hingePower(-0.1, 3) == 0.0);
  CHECK(hingePower(0.0, 3) == 0.0);
  CHECK(hingePower(0.2, 3) == doctest::Approx(0.008));
  CHECK(hingePowerDerivative(-0.1, 3) == 0.0);
  CHECK(hingePowerDerivative(0.0, 3) == 0.0);
  CHECK(hingePowerDerivative(0.2, 3) == doctest::Approx(0.12));
  CHECK(hingePower(0.5, 1) == doctest::Approx(0.5));
  CHECK(hingePowerDerivative(0.5, 1) == doctest::Approx(1.0));
}

TEST_CASE("penalty band over the speed bounds, 5% margin") {
  const PenaltyBand band = PenaltyBand::fromRange(30.0, 40.0, 0.05);
  CHECK(band.center == doctest::Approx(35.0));
  CHECK(band.width == doctest::Approx(4.75));

  // phi(30) = (20/19)^2 - 1 = 39/361; the cubic hinge and its q-derivative
  // follow as exact rationals.
  CHECK(band.phi(30.0) == doctest::Approx(39.0 / 361.0));
  CHECK(band.value(30.0, 3) == doctest::Approx(59319.0 / 47045881.0));
  CHECK(band.derivative(30.0, 3) == doctest::Approx(-730080.0 / 47045881.0));

  CHECK(band.value(35.0, 3) == 0.0);
  CHECK(band.value(32.0, 3) == 0.0);  // inside the shrunk band
  CHECK(band.value(30.26, 3) == 0.0); // just inside 35 - 4.75
  CHECK(band.value(30.24, 3) > 0.0);  // just outside
  CHECK(band.inside(39.7));
  CHECK_FALSE(band.inside(39.8));
}

TEST_CASE("obstacle field peaks at the axis and vanishes at the limit") {
  ObstacleField field;
  field.center = {100.0, -50.0};
  field.limit = 315.0;  // (1 + 0.05) * (200 + 100)

  CHECK(field.phi({100.0, -50.0, -300.0}) == doctest::Approx(1.0));
  CHECK(field.value({100.0, -50.0, -300.0}, 3) == doctest::Approx(1.0));
  CHECK(field.phi({100.0 + 315.0, -50.0, 0.0}) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(field.value({100.0, -50.0 + 400.0, 0.0}, 3) == 0.0);

  // phi(d) = 1 - (d/limit)^2 exactly.
  const double d = 150.0;
  CHECK(field.phi({100.0 + d, -50.0, 0.0}) ==
        doctest::Approx(1.0 - d * d / (315.0 * 315.0)));
}

TEST_CASE("penalty model wires scenario bounds with the configured margins") {
  Scenario s = levelScenario();
  SolverConfig config;
  const PenaltyModel model = PenaltyModel::fromScenario(s, config);

  CHECK(model.speed.center == doctest::Approx(35.0));
  CHECK(model.speed.width == doctest::Approx(4.75));
  CHECK(model.sin_gamma.center ==
        doctest::Approx(0.5 * (std::sin(s.gamma_min) + std::sin(s.gamma_max))));
  CHECK(model.sin_gamma.width ==
        doctest::Approx(0.95 * 0.5 *
                        (std::sin(s.gamma_max) - std::sin(s.gamma_min))));
  CHECK(model.nx.center == doctest::Approx(0.0));
  CHECK(model.nx.width == doctest::Approx(0.95 * 0.2));
  CHECK(model.nz.center == doctest::Approx(1.0));
  CHECK(model.nz.width == doctest::Approx(0.95 * 0.2));
  REQUIRE(model.obstacles.size() == 1);
  CHECK(model.obstacles[0].limit == doctest::Approx(1.05 * 300.0));
  CHECK(model.power == 3);
}

TEST_CASE("time cost modes") {
  TimeCostSpec spec;
  spec.mode = TimeCostMode::MinTime;
  CHECK(timeCost(173.0, spec, 3) == doctest::Approx(173.0));
  CHECK(timeCostDerivative(173.0, spec, 3) == doctest::Approx(1.0));

  spec.mode = TimeCostMode::Window;
  spec.window_min = 100.0;
  spec.window_max = 200.0;
  // ((220 - 150)/50)^2 - 1 = 0.96, cubed.
  CHECK(timeCost(220.0, spec, 3) == doctest::Approx(0.884736));
  CHECK(timeCost(150.0, spec, 3) == 0.0);
  CHECK(timeCost(100.0, spec, 3) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(timeCost(200.0, spec, 3) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(timeCostDerivative(150.0, spec, 3) == 0.0);
  CHECK(timeCostDerivative(220.0, spec, 3) > 0.0);
  CHECK(timeCostDerivative(80.0, spec, 3) < 0.0);

  spec.mode = TimeCostMode::Fixed;
  spec.fixed_duration = 90.0;
  CHECK(timeCost(90.0, spec, 3) == 0.0);
  CHECK(timeCostDerivative(90.0, spec, 3) == 0.0);
}

TEST_CASE("single-sample integrands agree with their closed forms") {
  UavState st;
  st.speed = 41.0;  // outside [30, 40]
  st.heading = 0.4;
  st.flight_path_angle = 0.12;
  LoadControls u;
  u.nx = 0.25;  // outside the 0.95 * [-0.2, 0.2] band
  u.ny = -0.1;
  u.nz = 1.15;
  FlatPoint fp = inverseMap(st, u);
  fp.jerk = {1.0, -2.0, 0.5};

  CHECK(jerkIntegrand(fp) == doctest::Approx(1.0 + 4.0 + 0.25));

  const PenaltyBand speed_band = PenaltyBand::fromRange(30.0, 40.0, 0.05);
  CHECK(speedIntegrand(fp, speed_band, 3) ==
        doctest::Approx(speed_band.value(41.0, 3)));

  const PenaltyBand gamma_band = PenaltyBand::fromRange(
      std::sin(-10.0 * M_PI / 180.0), std::sin(10.0 * M_PI / 180.0), 0.05);
  CHECK(sinGammaIntegrand(fp, gamma_band, 3) ==
        doctest::Approx(gamma_band.value(std::sin(0.12), 3)));

  const PenaltyBand load_band = PenaltyBand::fromRange(-0.2, 0.2, 0.05);
  CHECK(loadIntegrand(fp, LoadAxis::Nx, load_band, 3) ==
        doctest::Approx(load_band.value(0.25, 3)));
  CHECK(loadIntegrand(fp, LoadAxis::Ny, load_band, 3) ==
        doctest::Approx(load_band.value(-0.1, 3)));
  const PenaltyBand nz_band = PenaltyBand::fromRange(0.8, 1.2, 0.05);
  CHECK(loadIntegrand(fp, LoadAxis::Nz, nz_band, 3) ==
        doctest::Approx(nz_band.value(1.15, 3)));

  std::vector<ObstacleField> fields;
  fields.push_back({{fp.position.x() + 50.0, fp.position.y()}, 315.0});
  fields.push_back({{fp.position.x() + 5000.0, fp.position.y()}, 315.0});
  const double phi = 1.0 - 2500.0 / (315.0 * 315.0);
  CHECK(obstacleIntegrand(fp, fields, 3) ==
        doctest::Approx(std::pow(phi, 3)));
}

TEST_CASE("scenario validation rejects each malformed field") {
  CHECK_NOTHROW(validateScenario(levelScenario()));

  auto broken = levelScenario();
  broken.speed_min = 0.0;
  CHECK_THROWS_AS(validateScenario(broken), InvalidScenarioError);

  broken = levelScenario();
  broken.gamma_min = 0.3;
  broken.gamma_max = -0.3;
  CHECK_THROWS_AS(validateScenario(broken), InvalidScenarioError);

  broken = levelScenario();
  broken.nz_min = broken.nz_max;
  CHECK_THROWS_AS(validateScenario(broken), InvalidScenarioError);

  broken = levelScenario();
  broken.safe_distance = -1.0;
  CHECK_THROWS_AS(validateScenario(broken), InvalidScenarioError);

  broken = levelScenario();
  broken.obstacles[0].radius = 0.0;
  CHECK_THROWS_AS(validateScenario(broken), InvalidScenarioError);

  broken = levelScenario();
  broken.time_cost.mode = TimeCostMode::Window;
  broken.time_cost.window_min = 200.0;
  broken.time_cost.window_max = 100.0;
  CHECK_THROWS_AS(validateScenario(broken), InvalidScenarioError);

  broken = levelScenario();
  broken.time_cost.mode = TimeCostMode::Fixed;
  broken.time_cost.fixed_duration = 0.0;
  CHECK_THROWS_AS(validateScenario(broken), InvalidScenarioError);

  broken = levelScenario();
  broken.initial_state.speed = 50.0;
  CHECK_THROWS_AS(validateScenario(broken), InvalidScenarioError);

  broken = levelScenario();
  broken.final_state.position = {750.0, 380.0, -500.0};  // inside the disc
  CHECK_THROWS_AS(validateScenario(broken), InvalidScenarioError);

  broken = levelScenario();
  broken.initial_controls.nz = 2.0;
  CHECK_THROWS_AS(validateScenario(broken), InvalidScenarioError);
}

TEST_CASE("active-set filter never changes the objective") {
  const Scenario s = levelScenario();
  const int n = 8;
  SolverConfig with_filter;
  with_filter.filter_inactive = true;
  SolverConfig without_filter;
  without_filter.filter_inactive = false;

  // Zig-zag waypoints push speed, loads, and the obstacle term active on some
  // segments while leaving others inactive.
  Eigen::MatrixXd w = straightWaypoints(s, n);
  for (int i = 0; i < n - 1; ++i) {
    w(i, 1) += (i % 2 == 0) ? 200.0 : -150.0;
    w(i, 2) += (i % 2 == 0) ? -40.0 : 25.0;
  }
  const double log_t = std::log(2100.0 / 35.0);

  ObjectiveEvaluator filtered(n, s, with_filter);
  ObjectiveEvaluator unfiltered(n, s, without_filter);
  Eigen::VectorXd g_f, g_u;
  const CostBreakdown bd_f = filtered.evaluate(w, log_t, &g_f);
  const CostBreakdown bd_u = unfiltered.evaluate(w, log_t, &g_u);

  // The perturbed path must actually trigger penalties for this test to bite.
  REQUIRE(bd_f.obstacle > 0.0);
  REQUIRE(bd_f.effort > 0.0);

  CHECK(bd_f.total == doctest::Approx(bd_u.total).epsilon(1e-12));
  CHECK(bd_f.obstacle == doctest::Approx(bd_u.obstacle).epsilon(1e-12));
  CHECK((g_f - g_u).norm() <= 1e-12 * (1.0 + g_u.norm()));

  // Per-segment activity matches where the path actually comes close.
  const ActiveSets active =
      filterActive(filtered.lastTrajectory(), s, with_filter);
  REQUIRE(static_cast<int>(active.obstacles.size()) == n);
  bool any_active = false, any_inactive = false;
  for (int i = 0; i < n; ++i) {
    if (!active.obstacles[i].empty()) any_active = true;
    if (active.obstacles[i].empty()) any_inactive = true;
  }
  CHECK(any_active);
  CHECK(any_inactive);
}

TEST_CASE("breakdown total composes the weighted terms") {
  const Scenario s = levelScenario();
  const int n = 8;
  SolverConfig config;
  Eigen::MatrixXd w = straightWaypoints(s, n);
  for (int i = 0; i < n - 1; ++i) w(i, 1) += (i % 2 == 0) ? 250.0 : -250.0;
  const double log_t = std::log(2300.0 / 36.0);

  ObjectiveEvaluator evaluator(n, s, config);
  const CostBreakdown bd = evaluator.evaluate(w, log_t, nullptr);

  const double recomposed =
      bd.time_cost + config.weight_effort * bd.effort +
      config.weight_obstacle * bd.obstacle + config.weight_speed * bd.speed +
      config.weight_gamma * bd.gamma + config.weight_nx * bd.load_nx +
      config.weight_ny * bd.load_ny + config.weight_nz * bd.load_nz;
  CHECK(bd.total == doctest::Approx(recomposed).epsilon(1e-12));
  CHECK(bd.time_cost == doctest::Approx(evaluator.lastDuration()));
  CHECK(evaluator.lastSamples().size() ==
        static_cast<size_t>(n * (config.samples_per_segment + 1)));
}

TEST_CASE("an unusable duration yields +infinity, never NaN") {
  const Scenario s = levelScenario();
  const int n = 4;
  SolverConfig config;
  ObjectiveEvaluator evaluator(n, s, config);

  // exp(800) overflows; a line-search probe can land here.
  const Eigen::VectorXd x = evaluator.pack(straightWaypoints(s, n), 800.0);
  Eigen::VectorXd grad;
  const double value = evaluator(x, &grad);
  CHECK(std::isinf(value));
  CHECK(value > 0.0);
  CHECK(evaluator.lastSingular());
}

TEST_CASE("fixed-duration problems drop the time variable") {
  Scenario s = levelScenario();
  s.time_cost.mode = TimeCostMode::Fixed;
  s.time_cost.fixed_duration = 70.0;
  const int n = 5;
  ObjectiveEvaluator evaluator(n, s, SolverConfig{});
  CHECK(evaluator.fixedDuration());
  CHECK(evaluator.dimension() == 3 * (n - 1));

  ObjectiveEvaluator free_evaluator(n, levelScenario(), SolverConfig{});
  CHECK_FALSE(free_evaluator.fixedDuration());
  CHECK(free_evaluator.dimension() == 3 * (n - 1) + 1);
}
