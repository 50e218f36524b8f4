#include "dfto/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

namespace dfto {

namespace {

using Clock = std::chrono::steady_clock;

double seconds(Clock::time_point from, Clock::time_point to) {
  return std::chrono::duration<double>(to - from).count();
}

// Effort curvature is modeled at this normalized duration. Warm starts have
// unit duration by construction and min-time optima land modestly above it,
// so the metric stays at or below the true effort curvature near the
// solution; slower trajectories only weaken the conditioning, never invert
// it.
constexpr double kMetricReferenceDuration = 1.8;

// Change of variables for the waypoint block: z = L^T w per axis, with
//   L L^T = I + weight_effort / T_ref^5 * effortGram(system).
// In z the effort term's curvature is bounded independently of the segment
// count (in w it grows like N^5 for high-frequency waypoint modes, which
// stretches the Hessian spectrum and stalls the quasi-Newton iteration).
// The identity floor keeps flat directions at unit scale and reduces the map
// to the identity when weight_effort is zero. Coordinates past the waypoint
// block (the log-duration entry) pass through unchanged.
class WaypointWhitener {
 public:
  WaypointWhitener(const SplineSystem& system, double weight_effort)
      : m_(system.segments() - 1) {
    const double damping = std::pow(kMetricReferenceDuration, -5.0);
    Eigen::MatrixXd metric = damping * weight_effort * effortGram(system);
    metric.diagonal().array() += 1.0;
    lower_ = Eigen::LLT<Eigen::MatrixXd>(metric).matrixL();
  }

  Eigen::VectorXd whiten(const Eigen::VectorXd& x) const {
    Eigen::VectorXd z = x;
    auto w3 = waypointBlock(z);
    w3 = (w3 * lower_).eval();
    return z;
  }

  Eigen::VectorXd position(const Eigen::VectorXd& z) const {
    Eigen::VectorXd x = z;
    auto w3 = waypointBlock(x);
    Eigen::MatrixXd t = w3;
    lower_.triangularView<Eigen::Lower>().solveInPlace<Eigen::OnTheRight>(t);
    w3 = t;
    return x;
  }

  // dJ/dx -> dJ/dz in place; grad must be sized to the full dimension.
  void pullGradient(Eigen::VectorXd& grad) const {
    auto g3 = waypointBlock(grad);
    Eigen::MatrixXd t = g3;
    lower_.transpose()
        .triangularView<Eigen::Upper>()
        .solveInPlace<Eigen::OnTheRight>(t);
    g3 = t;
  }

 private:
  Eigen::Map<Eigen::Matrix<double, 3, Eigen::Dynamic>> waypointBlock(
      Eigen::VectorXd& v) const {
    return {v.data(), 3, m_};
  }

  int m_;
  Eigen::MatrixXd lower_;
};

// Central differences around x; the center evaluation runs last so the
// evaluator's cached state matches x afterwards.
double finiteDifferenceObjective(
    const std::function<double(const Eigen::VectorXd&)>& value,
    const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
  const int dim = static_cast<int>(x.size());
  grad.resize(dim);
  Eigen::VectorXd probe = x;
  for (int i = 0; i < dim; ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x(i)));
    probe(i) = x(i) + h;
    const double fp = value(probe);
    probe(i) = x(i) - h;
    const double fm = value(probe);
    probe(i) = x(i);
    grad(i) = (fp - fm) / (2.0 * h);
  }
  return value(x);
}

}  // namespace

SolveResult solve(const Scenario& scenario, const SolverConfig& config) {
  const auto t0 = Clock::now();
  InitialGuess guess = initialGuess(scenario, config);
  ObjectiveEvaluator evaluator(guess.segments, guess.scenario, config,
                               guess.gravity);
  const Eigen::VectorXd x0 =
      evaluator.pack(guess.waypoints, guess.log_duration);

  SolveResult out;
  out.report.segments = guess.segments;

  const double f0 = evaluator(x0, nullptr);
  if (!std::isfinite(f0)) {
    throw InitFailureError(
        "initial guess hits a speed-frame singularity; cannot start");
  }
  int first_feasible = evaluator.lastFeasibility().feasible() ? 0 : -1;

  // The optimizer runs in whitened coordinates; the evaluator keeps the
  // waypoint/log-duration packing.
  const WaypointWhitener whitener(evaluator.system(), config.weight_effort);
  const Eigen::VectorXd z0 = whitener.whiten(x0);

  Objective objective;
  if (config.gradient_mode == GradientMode::Analytic) {
    objective = [&](const Eigen::VectorXd& z, Eigen::VectorXd& grad) {
      const double f = evaluator(whitener.position(z), &grad);
      if (std::isfinite(f)) whitener.pullGradient(grad);
      return f;
    };
  } else {
    const auto value = [&](const Eigen::VectorXd& z) {
      return evaluator(whitener.position(z), nullptr);
    };
    objective = [&, value](const Eigen::VectorXd& z, Eigen::VectorXd& grad) {
      return finiteDifferenceObjective(value, z, grad);
    };
  }

  LbfgsOptions opts;
  opts.memory = config.lbfgs_memory;
  opts.max_iterations = config.max_iterations;
  opts.grad_tolerance = 0.0;  // the callback owns the exit condition
  const IterationCallback callback =
      [&](int iter, const Eigen::VectorXd&, double f, double grad_norm) {
        const FeasibilityReport residuals = evaluator.lastFeasibility();
        const bool feasible_now = residuals.feasible();
        if (feasible_now && first_feasible < 0) first_feasible = iter;
        if (config.trace > 0 && iter % config.trace == 0) {
          std::fprintf(stderr,
                       "iter %5d  f %.8g  |g| %.3g  T %.6g  worst %.3g\n",
                       iter, f, grad_norm, evaluator.lastDuration(),
                       residuals.worst());
        }
        return feasible_now && grad_norm <= config.grad_tolerance;
      };

  const auto t1 = Clock::now();
  LbfgsResult res = minimize(objective, z0, opts, callback);
  const auto t2 = Clock::now();

  // Refresh the cache at the accepted point (a failed line search leaves the
  // last rejected trial in it).
  evaluator(whitener.position(res.x), nullptr);

  const bool feasible_norm = evaluator.lastFeasibility().feasible();
  out.trajectory =
      denormalizedTrajectory(evaluator.lastTrajectory(), guess.scaling);

  out.report.iterations = res.iterations;
  out.report.evaluations = res.evaluations;
  out.report.first_feasible_iteration = first_feasible;
  out.report.grad_norm = res.grad_norm;
  out.report.status = res.status;
  out.report.converged =
      feasible_norm && res.grad_norm <= config.grad_tolerance;
  out.report.duration_s = out.trajectory.duration;
  out.report.setup_time_s = seconds(t0, t1);
  out.report.opt_time_s = seconds(t1, t2);
  out.report.wall_time_s = seconds(t0, t2);

  // Physical-unit reporting path: same waypoints/duration, unscaled scenario.
  ObjectiveEvaluator physical(guess.segments, scenario, config);
  out.report.cost = physical.evaluate(
      out.trajectory.waypoints, timeMappingInverse(out.trajectory.duration),
      nullptr);
  out.report.residuals = physical.lastFeasibility();
  out.report.feasible = out.report.residuals.feasible();
  return out;
}

FeasibilityReport feasibilityCheck(const FlatTrajectory& trajectory,
                                   const Scenario& scenario,
                                   int samples_per_segment, double gravity,
                                   double v_eps) {
  FeasibilityReport r;
  const double sg_min = std::sin(scenario.gamma_min);
  const double sg_max = std::sin(scenario.gamma_max);
  const double dt = trajectory.segmentDuration() / samples_per_segment;
  for (int i = 0; i < trajectory.segments; ++i) {
    for (int k = 0; k <= samples_per_segment; ++k) {
      const FlatPoint fp =
          trajectory.evaluate(i * trajectory.segmentDuration() + k * dt);
      const FrameVectors f =
          speedFrame(fp.velocity, fp.acceleration, gravity, v_eps);
      const double nx = f.load_vector.dot(f.r1);
      const double ny = f.load_vector.dot(f.r2);
      const double nz = -f.load_vector.dot(f.r3);
      const double sg = -fp.velocity.z() / f.speed;
      r.speed = std::max({r.speed, f.speed - scenario.speed_max,
                          scenario.speed_min - f.speed});
      r.gamma = std::max({r.gamma, sg - sg_max, sg_min - sg});
      r.load_nx = std::max({r.load_nx, nx - scenario.nx_max,
                            scenario.nx_min - nx});
      r.load_ny = std::max({r.load_ny, ny - scenario.ny_max,
                            scenario.ny_min - ny});
      r.load_nz = std::max({r.load_nz, nz - scenario.nz_max,
                            scenario.nz_min - nz});
      for (const Obstacle& o : scenario.obstacles) {
        const double d = (fp.position.head<2>() - o.center).norm();
        r.obstacle =
            std::max(r.obstacle, o.radius + scenario.safe_distance - d);
      }
    }
  }
  return r;
}

}  // namespace dfto
