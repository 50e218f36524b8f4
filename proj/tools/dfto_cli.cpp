#include "dfto/bench.hpp"
#include "dfto/flat_dynamics.hpp"
#include "dfto/initializer.hpp"
#include "dfto/scenario_io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace {

constexpr int kExitInfeasible = 2;
constexpr int kExitInvalid = 3;

constexpr double kDeg = M_PI / 180.0;

void printReport(const dfto::SolveReport& r) {
  std::printf("segments        %d\n", r.segments);
  std::printf("iterations      %d (%d evaluations)\n", r.iterations,
              r.evaluations);
  std::printf("duration        %.3f s\n", r.duration_s);
  std::printf("objective       %.6g (time %.6g, effort %.6g, obstacle %.6g)\n",
              r.cost.total, r.cost.time_cost, r.cost.effort, r.cost.obstacle);
  std::printf("grad norm       %.3g (normalized)\n", r.grad_norm);
  std::printf("feasible        %s", r.feasible ? "yes" : "NO");
  if (!r.feasible) {
    std::printf(
        "  violations: speed %.3g gamma %.3g nx %.3g ny %.3g nz %.3g "
        "obstacle %.3g",
        r.residuals.speed, r.residuals.gamma, r.residuals.load_nx,
        r.residuals.load_ny, r.residuals.load_nz, r.residuals.obstacle);
  }
  std::printf("\nconverged       %s\n", r.converged ? "yes" : "NO");
  if (r.first_feasible_iteration >= 0) {
    std::printf("first feasible  iteration %d\n", r.first_feasible_iteration);
  }
  std::printf("time            %.3f s total (%.3f setup, %.3f optimize)\n",
              r.wall_time_s, r.setup_time_s, r.opt_time_s);
}

// Climb corridor with randomized obstacles: a long low-to-high transit whose
// straight line runs right at the flight-path limit, so the planner has to
// trade altitude progress against horizontal maneuvering.
dfto::Scenario penetrationScenario(std::uint64_t seed) {
  dfto::Scenario s;
  s.initial_state.position = {500.0, 500.0, -200.0};
  s.initial_state.speed = 30.5;
  s.initial_state.heading = -90.0 * kDeg;
  s.initial_state.flight_path_angle = 0.0;
  s.final_state.position = {9500.0, 500.0, -1800.0};
  s.final_state.speed = 30.5;
  s.final_state.heading = 0.0;
  s.final_state.flight_path_angle = 0.0;

  // 15 obstacles over the corridor x in [1500, 8500], y in [-1500, 2500].
  const double x0 = 1500.0, y0 = -1500.0;
  const double extent_x = 7000.0, extent_y = 4000.0;
  std::vector<Eigen::Vector2d> clear = {
      s.initial_state.position.head<2>() - Eigen::Vector2d(x0, y0),
      s.final_state.position.head<2>() - Eigen::Vector2d(x0, y0)};
  const double density = 15.0 / (extent_x * extent_y * 1e-6);
  s.obstacles = dfto::generateObstacles(extent_x, extent_y, density, 200.0,
                                        400.0, clear,
                                        s.safe_distance + 10.0, seed);
  for (dfto::Obstacle& o : s.obstacles) {
    o.center += Eigen::Vector2d(x0, y0);
  }
  s.time_cost.mode = dfto::TimeCostMode::MinTime;
  return s;
}

int runSolve(const std::string& path, const std::string& out_csv, double dt,
             int segments, bool fd, int trace) {
  dfto::ScenarioFile file = dfto::loadScenarioFile(path);
  if (segments > 0) file.config.segments = segments;
  if (fd) file.config.gradient_mode = dfto::GradientMode::FiniteDifference;
  if (trace > 0) file.config.trace = trace;
  const dfto::SolveResult result = dfto::solve(file.scenario, file.config);
  if (!file.name.empty()) std::printf("scenario        %s\n", file.name.c_str());
  printReport(result.report);
  if (!out_csv.empty()) {
    dfto::exportTrajectoryCsv(out_csv, result.trajectory, file.scenario, dt,
                              file.config.gravity);
    std::printf("trajectory written to %s\n", out_csv.c_str());
  }
  return result.report.feasible ? 0 : kExitInfeasible;
}

int runBenchCmd(int groups, int runs, std::uint64_t seed, double weight_obstacle,
                const std::string& out_csv) {
  dfto::SolverConfig config;
  config.weight_obstacle = weight_obstacle;
  std::vector<dfto::BenchSummary> summaries;
  const std::vector<dfto::BenchRun> all =
      dfto::runBench(groups, runs, seed, config, &summaries);
  std::printf("group  runs  success  mean_time_s  mean_iterations\n");
  bool all_ok = true;
  for (const dfto::BenchSummary& s : summaries) {
    std::printf("%5d  %4d  %6.1f%%  %11.4f  %15.1f\n", s.group, s.runs,
                100.0 * s.success_rate, s.mean_time_s, s.mean_iterations);
    if (s.success_rate < 1.0) all_ok = false;
  }
  if (!out_csv.empty()) {
    dfto::writeBenchCsv(out_csv, all);
    std::printf("per-run results written to %s\n", out_csv.c_str());
  }
  return all_ok ? 0 : kExitInfeasible;
}

int runSweepCmd(const std::string& param_name, std::vector<double> values,
                const std::string& scenario_path, const std::string& out_csv) {
  dfto::SweepParam param;
  if (param_name == "segments") {
    param = dfto::SweepParam::Segments;
  } else if (param_name == "weight-obstacle") {
    param = dfto::SweepParam::WeightObstacle;
  } else if (param_name == "weight-effort") {
    param = dfto::SweepParam::WeightEffort;
  } else {
    std::fprintf(stderr, "unknown sweep parameter: %s\n", param_name.c_str());
    return kExitInvalid;
  }
  dfto::Scenario scenario;
  dfto::SolverConfig config;
  if (scenario_path.empty()) {
    scenario = dfto::twoCylinderScenario();
  } else {
    dfto::ScenarioFile file = dfto::loadScenarioFile(scenario_path);
    scenario = file.scenario;
    config = file.config;
  }
  const std::vector<dfto::SweepPoint> points =
      dfto::runSweep(scenario, config, param, values);
  std::printf("%-16s  objective    duration_s  effort      exposure    ok\n",
              param_name.c_str());
  for (const dfto::SweepPoint& p : points) {
    std::printf("%-16.6g  %-11.6g  %-10.4f  %-10.4g  %-10.4g  %s\n", p.value,
                p.report.cost.total, p.report.duration_s, p.effort_integral,
                p.obstacle_exposure,
                p.report.feasible && p.report.converged ? "yes" : "NO");
  }
  if (!out_csv.empty()) {
    dfto::writeSweepCsv(out_csv, param, points);
    std::printf("sweep written to %s\n", out_csv.c_str());
  }
  return 0;
}

int runGradCheck(int samples, std::uint64_t seed, double step,
                 double tolerance) {
  const dfto::SolverConfig config;
  double worst = 0.0;
  std::uint64_t worst_seed = 0;
  for (int i = 0; i < samples; ++i) {
    const std::uint64_t instance_seed = seed + static_cast<std::uint64_t>(i);
    const dfto::CheckInstance instance =
        dfto::makeCheckInstance(instance_seed, config);
    const dfto::GradCheckResult r =
        dfto::gradCheck(instance, config, step);
    if (r.rel_error > worst) {
      worst = r.rel_error;
      worst_seed = instance_seed;
    }
  }
  std::printf("%d instances checked, worst relative error %.3g (seed %llu)\n",
              samples, worst,
              static_cast<unsigned long long>(worst_seed));
  if (worst > tolerance) {
    std::printf("FAILED tolerance %.3g\n", tolerance);
    return kExitInfeasible;
  }
  std::printf("within tolerance %.3g\n", tolerance);
  return 0;
}

int runMakeScenario(const std::string& preset, const std::string& out,
                    int group, std::uint64_t seed) {
  dfto::ScenarioFile file;
  if (preset == "two-cylinder") {
    file.name = "two-cylinder";
    file.scenario = dfto::twoCylinderScenario();
  } else if (preset == "bench-group") {
    file.name = "bench-group-" + std::to_string(group);
    file.scenario = dfto::benchScenario(group, seed);
  } else if (preset == "penetration") {
    file.name = "penetration";
    file.scenario = penetrationScenario(seed);
  } else {
    std::fprintf(stderr, "unknown preset: %s\n", preset.c_str());
    return kExitInvalid;
  }
  dfto::saveScenarioFile(file, out);
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trajectory optimization for fixed-wing vehicles"};
  app.require_subcommand(1);

  std::string scenario_path, out_path, param_name, preset;
  std::vector<double> values;
  double dt = 0.5, step = 1e-6, tolerance = 1e-5;
  int segments = 0, groups = 8, runs = 100, samples = 20, group = 2, trace = 0;
  std::uint64_t seed = 1;
  bool fd = false;

  CLI::App* solve = app.add_subcommand("solve", "Solve a scenario file");
  solve->add_option("scenario", scenario_path, "scenario JSON path")
      ->required();
  solve->add_option("--out", out_path, "write the trajectory as CSV");
  solve->add_option("--dt", dt, "CSV sample step in seconds");
  solve->add_option("--segments", segments, "override the segment count");
  solve->add_flag("--fd", fd, "finite-difference gradients (reference path)");
  solve->add_option("--trace", trace, "log every n-th iteration to stderr");

  CLI::App* bench = app.add_subcommand("bench", "Monte-Carlo benchmark");
  double bench_weight_obstacle = 1e4;
  bench->add_option("--groups", groups, "number of size groups");
  bench->add_option("--runs", runs, "runs per group");
  bench->add_option("--seed", seed, "base seed");
  bench->add_option("--weight-obstacle", bench_weight_obstacle,
                    "obstacle penalty weight (dense random fields favor 1e4)");
  bench->add_option("--out", out_path, "write per-run results as CSV");

  CLI::App* sweep = app.add_subcommand("sweep", "Parameter sweep");
  sweep->add_option("--param", param_name,
                    "segments | weight-obstacle | weight-effort")
      ->required();
  sweep->add_option("--values", values, "values to sweep")->required();
  sweep->add_option("--scenario", scenario_path,
                    "scenario JSON (default: built-in two-cylinder)");
  sweep->add_option("--out", out_path, "write the sweep as CSV");

  CLI::App* grad = app.add_subcommand("grad-check",
                                      "Analytic vs finite-difference gradients");
  grad->add_option("--samples", samples, "number of random instances");
  grad->add_option("--seed", seed, "base seed");
  grad->add_option("--step", step, "finite-difference step");
  grad->add_option("--tolerance", tolerance, "relative error tolerance");

  CLI::App* make = app.add_subcommand("make-scenario",
                                      "Write a built-in scenario file");
  make->add_option("preset", preset,
                   "two-cylinder | bench-group | penetration")
      ->required();
  make->add_option("--out", out_path, "output JSON path")->required();
  make->add_option("--group", group, "bench group (bench-group preset)");
  make->add_option("--seed", seed, "obstacle seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      return runSolve(scenario_path, out_path, dt, segments, fd, trace);
    }
    if (bench->parsed()) {
      return runBenchCmd(groups, runs, seed, bench_weight_obstacle, out_path);
    }
    if (sweep->parsed()) {
      return runSweepCmd(param_name, values, scenario_path, out_path);
    }
    if (grad->parsed()) {
      return runGradCheck(samples, seed, step, tolerance);
    }
    if (make->parsed()) {
      return runMakeScenario(preset, out_path, group, seed);
    }
  } catch (const dfto::InvalidScenarioError& e) {
    std::fprintf(stderr, "invalid scenario: %s\n", e.what());
    return kExitInvalid;
  } catch (const dfto::DftoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInfeasible;
  }
  return 0;
}
