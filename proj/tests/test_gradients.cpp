#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "dfto/bench.hpp"
#include "dfto/costs.hpp"
#include "dfto/gradients.hpp"

using namespace dfto;

namespace {

// Central difference of a scalar functional of the flat sample, component
// by component across position/velocity/acceleration/jerk.
SampleGradient fdSampleGradient(const std::function<double(const FlatPoint&)>& f,
                                const FlatPoint& fp, double h) {
  SampleGradient g;
  const auto diff = [&](FlatPoint& probe, double& slot) {
    const double keep = slot;
    const double step = h * std::max(1.0, std::abs(keep));
    slot = keep + step;
    const double up = f(probe);
    slot = keep - step;
    const double down = f(probe);
    slot = keep;
    return (up - down) / (2.0 * step);
  };
  FlatPoint probe = fp;
  for (int k = 0; k < 3; ++k) g.position(k) = diff(probe, probe.position(k));
  for (int k = 0; k < 3; ++k) g.velocity(k) = diff(probe, probe.velocity(k));
  for (int k = 0; k < 3; ++k)
    g.acceleration(k) = diff(probe, probe.acceleration(k));
  for (int k = 0; k < 3; ++k) g.jerk(k) = diff(probe, probe.jerk(k));
  return g;
}

void checkSampleGradient(const SampleGradient& analytic,
                         const SampleGradient& fd, double tol) {
  const double scale = 1.0 + std::sqrt(fd.position.squaredNorm() +
                                       fd.velocity.squaredNorm() +
                                       fd.acceleration.squaredNorm() +
                                       fd.jerk.squaredNorm());
  CHECK((analytic.position - fd.position).norm() <= tol * scale);
  CHECK((analytic.velocity - fd.velocity).norm() <= tol * scale);
  CHECK((analytic.acceleration - fd.acceleration).norm() <= tol * scale);
  CHECK((analytic.jerk - fd.jerk).norm() <= tol * scale);
}

// A sample with every penalty family strictly active.
FlatPoint activeSample() {
  UavState st;
  st.position = {120.0, -60.0, -400.0};
  st.speed = 41.5;
  st.heading = 0.7;
  st.flight_path_angle = 0.185;  // sin(gamma) past the 0.95 band
  LoadControls u;
  u.nx = 0.26;
  u.ny = -0.23;
  u.nz = 1.31;
  FlatPoint fp = inverseMap(st, u);
  fp.jerk = {0.8, -1.1, 0.4};
  return fp;
}

}  // namespace

TEST_CASE("effort integrand gradient") {
  const FlatPoint fp = activeSample();
  SampleGradient g;
  const double value = jerkWithGradient(fp, &g);
  CHECK(value == doctest::Approx(fp.jerk.squaredNorm()));
  const SampleGradient fd =
      fdSampleGradient([](const FlatPoint& p) { return jerkIntegrand(p); }, fp,
                       1e-6);
  checkSampleGradient(g, fd, 1e-7);
}

TEST_CASE("speed penalty gradient") {
  const FlatPoint fp = activeSample();
  const PenaltyBand band = PenaltyBand::fromRange(30.0, 40.0, 0.05);
  const FrameVectors frame = speedFrame(fp.velocity, fp.acceleration);
  SampleGradient g;
  const double value = speedWithGradient(fp, frame, band, 3, &g);
  REQUIRE(value > 0.0);
  const SampleGradient fd = fdSampleGradient(
      [&](const FlatPoint& p) { return speedIntegrand(p, band, 3); }, fp, 1e-6);
  checkSampleGradient(g, fd, 1e-7);
}

TEST_CASE("flight-path penalty gradient") {
  const FlatPoint fp = activeSample();
  const PenaltyBand band = PenaltyBand::fromRange(
      std::sin(-10.0 * M_PI / 180.0), std::sin(10.0 * M_PI / 180.0), 0.05);
  const FrameVectors frame = speedFrame(fp.velocity, fp.acceleration);
  SampleGradient g;
  const double value = sinGammaWithGradient(fp, frame, band, 3, &g);
  REQUIRE(value > 0.0);
  const SampleGradient fd = fdSampleGradient(
      [&](const FlatPoint& p) { return sinGammaIntegrand(p, band, 3); }, fp,
      1e-6);
  checkSampleGradient(g, fd, 1e-7);
}

TEST_CASE("load penalty gradients for all three axes") {
  const FlatPoint fp = activeSample();
  const FrameVectors frame =
      speedFrame(fp.velocity, fp.acceleration, kDefaultGravity);
  const PenaltyBand xy_band = PenaltyBand::fromRange(-0.2, 0.2, 0.05);
  const PenaltyBand z_band = PenaltyBand::fromRange(0.8, 1.2, 0.05);

  const struct {
    LoadAxis axis;
    const PenaltyBand* band;
    double value;
  } cases[] = {
      {LoadAxis::Nx, &xy_band, frame.load_vector.dot(frame.r1)},
      {LoadAxis::Ny, &xy_band, frame.load_vector.dot(frame.r2)},
      {LoadAxis::Nz, &z_band, -frame.load_vector.dot(frame.r3)},
  };
  for (const auto& c : cases) {
    SampleGradient g;
    const double value = loadWithGradient(fp, frame, c.value, c.axis, *c.band,
                                          3, kDefaultGravity, &g);
    REQUIRE(value > 0.0);
    const SampleGradient fd = fdSampleGradient(
        [&](const FlatPoint& p) {
          return loadIntegrand(p, c.axis, *c.band, 3);
        },
        fp, 1e-6);
    checkSampleGradient(g, fd, 1e-6);
  }
}

TEST_CASE("obstacle penalty gradient") {
  const FlatPoint fp = activeSample();
  ObstacleField field;
  field.center = {fp.position.x() + 120.0, fp.position.y() - 80.0};
  field.limit = 420.0;
  SampleGradient g;
  const double value = obstacleWithGradient(fp, field, 3, &g);
  REQUIRE(value > 0.0);
  const SampleGradient fd = fdSampleGradient(
      [&](const FlatPoint& p) {
        return obstacleIntegrand(p, {field}, 3);
      },
      fp, 1e-6);
  checkSampleGradient(g, fd, 1e-7);
}

TEST_CASE("inactive penalties carry exactly zero gradient") {
  UavState st;
  st.speed = 35.0;
  FlatPoint fp = inverseMap(st, LoadControls{});
  const FrameVectors frame = speedFrame(fp.velocity, fp.acceleration);
  const PenaltyBand band = PenaltyBand::fromRange(30.0, 40.0, 0.05);
  SampleGradient g;
  const double value = speedWithGradient(fp, frame, band, 3, &g);
  CHECK(value == 0.0);
  CHECK(g.velocity.norm() == 0.0);
  CHECK(g.position.norm() == 0.0);
}

TEST_CASE("propagate with no integrand gradient reduces to the time cost") {
  const int n = 5;
  const SplineSystem system(n);
  BoundaryState start, finish;
  start.position = {0.0, 0.0, -1.0};
  start.velocity = {1.0, 0.0, 0.0};
  finish.position = {4.0, 0.0, -1.0};
  finish.velocity = {1.0, 0.0, 0.0};

  GradAccumulator acc;
  acc.by_coeffs = Eigen::MatrixXd::Zero(6 * n, 3);
  acc.by_duration = 0.0;
  const double duration = 4.0;
  propagate(acc, system, start, finish, duration, 1.0);

  CHECK(acc.by_waypoints.rows() == n - 1);
  CHECK(acc.by_waypoints.norm() == 0.0);
  // dJ/d(log T) = T * dQ/dT with dQ/dT = 1.
  CHECK(acc.by_log_duration == doctest::Approx(duration));

  CHECK(timeMappingGradient(2.5, std::log(8.0)) == doctest::Approx(20.0));
}

TEST_CASE("evaluator gradient matches finite differences in physical units") {
  Scenario s;
  s.initial_state.position = {0.0, 0.0, -500.0};
  s.initial_state.speed = 35.0;
  s.final_state.position = {2000.0, 300.0, -620.0};
  s.final_state.speed = 33.0;
  s.final_state.heading = 0.2;
  s.obstacles.push_back({{900.0, 350.0}, 180.0});
  s.time_cost.mode = TimeCostMode::MinTime;

  const int n = 6;
  SolverConfig config;
  ObjectiveEvaluator evaluator(n, s, config);

  Eigen::MatrixXd w(n - 1, 3);
  for (int i = 1; i <= n - 1; ++i) {
    const double f = static_cast<double>(i) / n;
    w.row(i - 1) = ((1.0 - f) * s.initial_state.position +
                    f * s.final_state.position)
                       .transpose();
    w(i - 1, 1) += (i % 2 == 0) ? 120.0 : -80.0;
  }
  Eigen::VectorXd x = evaluator.pack(w, std::log(2100.0 / 34.0));

  Eigen::VectorXd analytic;
  const double value = evaluator(x, &analytic);
  REQUIRE(std::isfinite(value));

  Eigen::VectorXd fd(x.size());
  for (int k = 0; k < x.size(); ++k) {
    const double keep = x(k);
    const double h = 1e-6 * std::max(1.0, std::abs(keep));
    Eigen::VectorXd probe = x;
    probe(k) = keep + h;
    const double up = evaluator(probe, nullptr);
    probe(k) = keep - h;
    const double down = evaluator(probe, nullptr);
    fd(k) = (up - down) / (2.0 * h);
  }
  CHECK((analytic - fd).norm() <= 1e-5 * (1.0 + fd.norm()));
}

TEST_CASE("random normalized instances pass the gradient check in all modes") {
  SolverConfig config;
  int fixed_seen = 0, window_seen = 0, min_time_seen = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const CheckInstance instance = makeCheckInstance(seed, config);
    switch (instance.scenario.time_cost.mode) {
      case TimeCostMode::Fixed: ++fixed_seen; break;
      case TimeCostMode::Window: ++window_seen; break;
      case TimeCostMode::MinTime: ++min_time_seen; break;
    }
    const GradCheckResult r = gradCheck(instance, config, 1e-6);
    CAPTURE(seed);
    CHECK(r.rel_error <= 1e-5);
  }
  // The seed range must exercise every time-cost mode.
  CHECK(fixed_seen > 0);
  CHECK(window_seen > 0);
  CHECK(min_time_seen > 0);
}

TEST_CASE("finite-difference gradient mode agrees with the analytic mode") {
  SolverConfig analytic_config;
  SolverConfig fd_config;
  fd_config.gradient_mode = GradientMode::FiniteDifference;

  const CheckInstance instance = makeCheckInstance(3, analytic_config);
  ObjectiveEvaluator a(instance.segments, instance.scenario, analytic_config,
                       instance.gravity);
  ObjectiveEvaluator b(instance.segments, instance.scenario, fd_config,
                       instance.gravity);
  const Eigen::VectorXd x = a.pack(instance.waypoints, instance.log_duration);
  Eigen::VectorXd ga, gb;
  const double va = a(x, &ga);
  const double vb = b(x, &gb);
  CHECK(va == doctest::Approx(vb).epsilon(1e-12));
  CHECK((ga - gb).norm() <= 1e-5 * (1.0 + ga.norm()));
}
