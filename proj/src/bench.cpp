#include "dfto/bench.hpp"

#include "dfto/flat_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

namespace dfto {

namespace {

constexpr double kDeg = M_PI / 180.0;

std::uint64_t mixSeed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::string formatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

std::vector<Obstacle> generateObstacles(
    double extent_x_m, double extent_y_m, double density_per_km2,
    double radius_min_m, double radius_max_m,
    const std::vector<Eigen::Vector2d>& clear_points, double clear_margin_m,
    std::uint64_t seed, double pair_gap_m) {
  const double area_km2 = extent_x_m * extent_y_m * 1e-6;
  const int count = static_cast<int>(std::llround(density_per_km2 * area_km2));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> radius(radius_min_m, radius_max_m);

  std::vector<int> px(count), py(count);
  std::iota(px.begin(), px.end(), 0);
  std::iota(py.begin(), py.end(), 0);
  std::shuffle(px.begin(), px.end(), rng);
  std::shuffle(py.begin(), py.end(), rng);

  std::vector<Obstacle> obstacles;
  obstacles.reserve(count);

  const auto placeable = [&](const Obstacle& o) {
    for (const Eigen::Vector2d& p : clear_points) {
      if ((o.center - p).norm() < o.radius + clear_margin_m) return false;
    }
    // Two discs closer than pair_gap_m surface-to-surface act as a single
    // merged wall, which changes the nominal obstacle count and can seal off
    // every corridor; keep them distinct.
    if (pair_gap_m > 0.0) {
      for (const Obstacle& other : obstacles) {
        if ((o.center - other.center).norm() <
            o.radius + other.radius + pair_gap_m) {
          return false;
        }
      }
    }
    return true;
  };

  for (int j = 0; j < count; ++j) {
    Obstacle o;
    o.center = {(px[j] + unit(rng)) / count * extent_x_m,
                (py[j] + unit(rng)) / count * extent_y_m};
    o.radius = radius(rng);
    // A stratified draw that collides is replaced by uniform re-draws; the
    // radius is kept so the count and size mix stay intact.
    for (int tries = 0; tries < 1000 && !placeable(o); ++tries) {
      o.center = {unit(rng) * extent_x_m, unit(rng) * extent_y_m};
    }
    obstacles.push_back(o);
  }
  return obstacles;
}

Scenario benchScenario(int group, std::uint64_t seed) {
  if (group < 1) throw InvalidScenarioError("bench group must be >= 1");
  Scenario s;
  const double extent_x = 5000.0 + 2500.0 * (group - 1);
  const double extent_y = 5000.0;

  s.initial_state.position = {500.0, 2500.0, -500.0};
  s.initial_state.speed = 30.0;
  s.initial_state.heading = 0.0;
  s.initial_state.flight_path_angle = 0.0;
  s.final_state.position = {4500.0 + 2500.0 * (group - 1), 2500.0, -1000.0};
  s.final_state.speed = 30.0;
  s.final_state.heading = 0.0;
  s.final_state.flight_path_angle = 0.0;

  // Terminal headings are fixed, so an obstacle parked just ahead of a
  // terminal can be unavoidable: the tightest level turn has radius
  // V^2 / (g ny_max) and needs about two radii of free space to steer around
  // an obstacle in the worst (dead-ahead) geometry. Clearing less than that
  // produces scenarios no bounded-load trajectory can satisfy.
  const double turn_radius = s.initial_state.speed * s.initial_state.speed /
                             (kDefaultGravity * s.ny_max);
  s.obstacles = generateObstacles(
      extent_x, extent_y, 0.4, 200.0, 400.0,
      {s.initial_state.position.head<2>(), s.final_state.position.head<2>()},
      s.safe_distance + 2.0 * turn_radius, seed, 2.0 * s.safe_distance);
  s.time_cost.mode = TimeCostMode::MinTime;
  return s;
}

Scenario twoCylinderScenario() {
  Scenario s;
  s.initial_state.position = {300.0, 4700.0, -500.0};
  s.initial_state.speed = 30.0;
  s.initial_state.heading = -90.0 * kDeg;
  s.initial_state.flight_path_angle = 0.0;
  s.final_state.position = {4700.0, 300.0, -1000.0};
  s.final_state.speed = 30.0;
  s.final_state.heading = -90.0 * kDeg;
  s.final_state.flight_path_angle = 0.0;
  s.obstacles = {{{1800.0, 3800.0}, 800.0}, {{3200.0, 1200.0}, 800.0}};
  s.time_cost.mode = TimeCostMode::MinTime;
  return s;
}

std::vector<BenchRun> runBench(int groups, int runs_per_group,
                               std::uint64_t seed, const SolverConfig& config,
                               std::vector<BenchSummary>* summaries) {
  std::vector<BenchRun> runs;
  runs.reserve(static_cast<size_t>(groups) * runs_per_group);
  if (summaries) summaries->clear();
  for (int g = 1; g <= groups; ++g) {
    BenchSummary summary;
    summary.group = g;
    summary.runs = runs_per_group;
    double time_sum = 0.0;
    double iter_sum = 0.0;
    for (int r = 0; r < runs_per_group; ++r) {
      BenchRun run;
      run.group = g;
      run.seed = mixSeed(seed, static_cast<std::uint64_t>(g) << 32 | r);
      try {
        const Scenario scenario = benchScenario(g, run.seed);
        const SolveResult result = solve(scenario, config);
        run.feasible = result.report.feasible;
        run.converged = result.report.converged;
        run.success = run.feasible && run.converged;
        run.iterations = result.report.iterations;
        run.segments = result.report.segments;
        run.wall_time_s = result.report.wall_time_s;
        run.objective = result.report.cost.total;
        run.duration_s = result.report.duration_s;
      } catch (const DftoError&) {
        run.success = false;
      }
      time_sum += run.wall_time_s;
      iter_sum += run.iterations;
      if (run.success) ++summary.successes;
      runs.push_back(run);
    }
    if (runs_per_group > 0) {
      summary.success_rate =
          static_cast<double>(summary.successes) / runs_per_group;
      summary.mean_time_s = time_sum / runs_per_group;
      summary.mean_iterations = iter_sum / runs_per_group;
    }
    if (summaries) summaries->push_back(summary);
  }
  return runs;
}

void writeBenchCsv(const std::string& path, const std::vector<BenchRun>& runs) {
  std::ofstream out(path);
  if (!out) throw DftoError("cannot write bench csv: " + path);
  out << "group,seed,success,feasible,converged,iterations,segments,"
         "wall_time_s,objective,duration_s\n";
  for (const BenchRun& r : runs) {
    out << r.group << ',' << r.seed << ',' << (r.success ? 1 : 0) << ','
        << (r.feasible ? 1 : 0) << ',' << (r.converged ? 1 : 0) << ','
        << r.iterations << ',' << r.segments << ','
        << formatDouble(r.wall_time_s) << ',' << formatDouble(r.objective)
        << ',' << formatDouble(r.duration_s) << '\n';
  }
}

std::vector<SweepPoint> runSweep(const Scenario& scenario,
                                 const SolverConfig& config, SweepParam param,
                                 const std::vector<double>& values) {
  std::vector<SweepPoint> points;
  points.reserve(values.size());
  for (double value : values) {
    SolverConfig cfg = config;
    switch (param) {
      case SweepParam::Segments:
        cfg.segments = static_cast<int>(std::llround(value));
        break;
      case SweepParam::WeightObstacle:
        cfg.weight_obstacle = value;
        break;
      case SweepParam::WeightEffort:
        cfg.weight_effort = value;
        break;
    }
    SweepPoint point;
    point.value = value;
    SolveResult result = solve(scenario, cfg);
    point.report = result.report;
    point.obstacle_exposure = obstacleExposure(result.trajectory, scenario,
                                               cfg.samples_per_segment);
    point.effort_integral =
        effortIntegral(result.trajectory, cfg.samples_per_segment);
    points.push_back(std::move(point));
  }
  return points;
}

void writeSweepCsv(const std::string& path, SweepParam param,
                   const std::vector<SweepPoint>& points) {
  std::ofstream out(path);
  if (!out) throw DftoError("cannot write sweep csv: " + path);
  const char* name = param == SweepParam::Segments ? "segments"
                     : param == SweepParam::WeightObstacle
                         ? "weight_obstacle"
                         : "weight_effort";
  out << name
      << ",objective,time_cost,duration_s,effort_integral,obstacle_exposure,"
         "feasible,converged,iterations,wall_time_s,opt_time_s\n";
  for (const SweepPoint& p : points) {
    out << formatDouble(p.value) << ',' << formatDouble(p.report.cost.total)
        << ',' << formatDouble(p.report.cost.time_cost) << ','
        << formatDouble(p.report.duration_s) << ','
        << formatDouble(p.effort_integral) << ','
        << formatDouble(p.obstacle_exposure) << ','
        << (p.report.feasible ? 1 : 0) << ',' << (p.report.converged ? 1 : 0)
        << ',' << p.report.iterations << ','
        << formatDouble(p.report.wall_time_s) << ','
        << formatDouble(p.report.opt_time_s) << '\n';
  }
}

double obstacleExposure(const FlatTrajectory& traj, const Scenario& scenario,
                        int samples_per_segment) {
  if (scenario.obstacles.empty() || !(scenario.safe_distance > 0.0)) {
    return 0.0;
  }
  const double dt = traj.segmentDuration() / samples_per_segment;
  double sum = 0.0;
  for (int i = 0; i < traj.segments; ++i) {
    for (int k = 0; k <= samples_per_segment; ++k) {
      const double w = (k == 0 || k == samples_per_segment) ? 0.5 : 1.0;
      const Eigen::Vector3d p =
          traj.derivative(i * traj.segmentDuration() + k * dt, 0);
      double surface = std::numeric_limits<double>::infinity();
      for (const Obstacle& o : scenario.obstacles) {
        surface =
            std::min(surface, (p.head<2>() - o.center).norm() - o.radius);
      }
      sum += w * std::max(1.0 - surface / scenario.safe_distance, 0.0);
    }
  }
  return sum * dt;
}

double effortIntegral(const FlatTrajectory& traj, int samples_per_segment) {
  const double dt = traj.segmentDuration() / samples_per_segment;
  double sum = 0.0;
  for (int i = 0; i < traj.segments; ++i) {
    for (int k = 0; k <= samples_per_segment; ++k) {
      const double w = (k == 0 || k == samples_per_segment) ? 0.5 : 1.0;
      sum += w * traj.derivative(i * traj.segmentDuration() + k * dt, 3)
                     .squaredNorm();
    }
  }
  return sum * dt;
}

void exportTrajectoryCsv(const std::string& path, const FlatTrajectory& traj,
                         const Scenario& scenario, double sample_dt_s,
                         double gravity) {
  if (!(sample_dt_s > 0.0)) {
    throw OutOfDomainError("csv sample step must be positive");
  }
  std::ofstream out(path);
  if (!out) throw DftoError("cannot write trajectory csv: " + path);
  out << "t_s,x_m,y_m,z_m,vx_mps,vy_mps,vz_mps,speed_mps,heading_deg,"
         "flight_path_deg,nx,ny,nz,min_clearance_m\n";
  const int steps = static_cast<int>(std::ceil(traj.duration / sample_dt_s));
  for (int k = 0; k <= steps; ++k) {
    const double t = std::min(k * sample_dt_s, traj.duration);
    const FlatPoint fp = traj.evaluate(t);
    const UavState state = mapState(fp);
    const LoadControls loads = mapControls(fp, gravity);
    double clearance = std::numeric_limits<double>::infinity();
    for (const Obstacle& o : scenario.obstacles) {
      clearance = std::min(
          clearance, (fp.position.head<2>() - o.center).norm() - o.radius);
    }
    out << formatDouble(t) << ',' << formatDouble(fp.position.x()) << ','
        << formatDouble(fp.position.y()) << ','
        << formatDouble(fp.position.z()) << ','
        << formatDouble(fp.velocity.x()) << ','
        << formatDouble(fp.velocity.y()) << ','
        << formatDouble(fp.velocity.z()) << ',' << formatDouble(state.speed)
        << ',' << formatDouble(state.heading / kDeg) << ','
        << formatDouble(state.flight_path_angle / kDeg) << ','
        << formatDouble(loads.nx) << ',' << formatDouble(loads.ny) << ','
        << formatDouble(loads.nz) << ',' << formatDouble(clearance) << '\n';
    if (t >= traj.duration) break;
  }
}

CheckInstance makeCheckInstance(std::uint64_t seed,
                                const SolverConfig& config) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (int attempt = 0; attempt < 64; ++attempt) {
    Scenario s;
    s.initial_state.position = {500.0 + 1000.0 * unit(rng),
                                500.0 + 4000.0 * unit(rng),
                                -(400.0 + 800.0 * unit(rng))};
    s.initial_state.speed = 31.0 + 8.0 * unit(rng);
    s.initial_state.heading = (2.0 * unit(rng) - 1.0) * M_PI;
    s.initial_state.flight_path_angle = (2.0 * unit(rng) - 1.0) * 5.0 * kDeg;
    s.final_state.position = {3500.0 + 2000.0 * unit(rng),
                              500.0 + 4000.0 * unit(rng),
                              -(400.0 + 800.0 * unit(rng))};
    s.final_state.speed = 31.0 + 8.0 * unit(rng);
    s.final_state.heading = (2.0 * unit(rng) - 1.0) * M_PI;
    s.final_state.flight_path_angle = (2.0 * unit(rng) - 1.0) * 5.0 * kDeg;
    for (LoadControls* u : {&s.initial_controls, &s.final_controls}) {
      u->nx = (2.0 * unit(rng) - 1.0) * 0.1;
      u->ny = (2.0 * unit(rng) - 1.0) * 0.1;
      u->nz = 0.9 + 0.2 * unit(rng);
    }
    const int n_obstacles = static_cast<int>(unit(rng) * 4.0);
    s.obstacles = generateObstacles(
        5000.0, 5000.0, n_obstacles / 25.0, 200.0, 400.0,
        {s.initial_state.position.head<2>(), s.final_state.position.head<2>()},
        s.safe_distance + 10.0, mixSeed(seed, 1000 + attempt));

    const double mode_draw = unit(rng);
    if (mode_draw > 0.85) {
      s.time_cost.mode = TimeCostMode::Fixed;
    } else if (mode_draw > 0.70) {
      s.time_cost.mode = TimeCostMode::Window;
    }

    SolverConfig cfg = config;
    cfg.segments = 3 + static_cast<int>(unit(rng) * 18.0);

    CheckInstance instance;
    try {
      // Provisional duration values so validation passes before the length
      // scale is known; rewritten in normalized units below.
      if (s.time_cost.mode == TimeCostMode::Fixed) {
        s.time_cost.fixed_duration = 1.0;
      } else if (s.time_cost.mode == TimeCostMode::Window) {
        s.time_cost.window_min = 0.5;
        s.time_cost.window_max = 1.0;
      }
      InitialGuess guess = initialGuess(s, cfg);
      instance.scenario = guess.scenario;
      instance.segments = guess.segments;
      instance.gravity = guess.gravity;
      instance.waypoints = guess.waypoints;
      instance.log_duration = std::log(0.85 + 0.4 * unit(rng));
      if (s.time_cost.mode == TimeCostMode::Fixed) {
        instance.scenario.time_cost.fixed_duration =
            0.9 + 0.3 * unit(rng);
        instance.log_duration =
            std::log(instance.scenario.time_cost.fixed_duration);
      } else if (s.time_cost.mode == TimeCostMode::Window) {
        instance.scenario.time_cost.window_min = 0.8 + 0.1 * unit(rng);
        instance.scenario.time_cost.window_max =
            instance.scenario.time_cost.window_min + 0.3;
      }
      for (int i = 0; i < instance.waypoints.rows(); ++i) {
        for (int c = 0; c < 3; ++c) {
          instance.waypoints(i, c) += (2.0 * unit(rng) - 1.0) * 0.03;
        }
      }
      ObjectiveEvaluator evaluator(instance.segments, instance.scenario, cfg,
                                   instance.gravity);
      evaluator.evaluate(instance.waypoints, instance.log_duration, nullptr);
      if (evaluator.lastSingular()) continue;
      // Keep a healthy margin from the frame singularities so finite
      // differences stay clean.
      bool well_conditioned = true;
      for (const SampleData& sd : evaluator.lastSamples()) {
        if (sd.frame.speed < 1e-3 || sd.frame.w2_norm < 1e-3) {
          well_conditioned = false;
          break;
        }
      }
      if (!well_conditioned) continue;
      return instance;
    } catch (const DftoError&) {
      continue;
    }
  }
  throw InitFailureError("could not draw a usable derivative-check instance");
}

GradCheckResult gradCheck(const CheckInstance& instance,
                          const SolverConfig& base_config, double fd_step) {
  SolverConfig cfg = base_config;
  cfg.segments = instance.segments;
  ObjectiveEvaluator evaluator(instance.segments, instance.scenario, cfg,
                               instance.gravity);
  const Eigen::VectorXd x =
      evaluator.pack(instance.waypoints, instance.log_duration);

  Eigen::VectorXd analytic(x.size());
  evaluator(x, &analytic);

  Eigen::VectorXd fd(x.size());
  Eigen::VectorXd probe = x;
  for (int i = 0; i < x.size(); ++i) {
    const double h = fd_step * std::max(1.0, std::abs(x(i)));
    probe(i) = x(i) + h;
    const double fp = evaluator(probe, nullptr);
    probe(i) = x(i) - h;
    const double fm = evaluator(probe, nullptr);
    probe(i) = x(i);
    fd(i) = (fp - fm) / (2.0 * h);
  }

  GradCheckResult result;
  result.analytic_norm = analytic.norm();
  result.fd_norm = fd.norm();
  result.rel_error =
      (analytic - fd).norm() / std::max(result.fd_norm, 1e-12);
  return result;
}

}  // namespace dfto
