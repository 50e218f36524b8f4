#pragma once

#include "dfto/optimizer.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dfto {

// Latin-hypercube obstacle placement over [0, extent_x] x [0, extent_y] with
// uniform radii. Obstacles whose inflated disc covers a clear point, or whose
// surface comes within pair_gap_m of an already placed obstacle, are re-drawn
// uniformly from the same stream, so instances stay well-posed.
std::vector<Obstacle> generateObstacles(
    double extent_x_m, double extent_y_m, double density_per_km2,
    double radius_min_m, double radius_max_m,
    const std::vector<Eigen::Vector2d>& clear_points, double clear_margin_m,
    std::uint64_t seed, double pair_gap_m = 0.0);

// Monte-Carlo scenario family: group g spans (5 + 2.5(g-1)) km x 5 km with
// obstacle density 0.4/km^2, radii in [200, 400] m, level terminals at fixed
// positions. Group 2 (7.5 km x 5 km) carries 15 obstacles.
Scenario benchScenario(int group, std::uint64_t seed);

// Deterministic two-cylinder scenario used by the sweeps.
Scenario twoCylinderScenario();

struct BenchRun {
  int group = 0;
  std::uint64_t seed = 0;
  bool success = false;  // feasible && converged
  bool feasible = false;
  bool converged = false;
  int iterations = 0;
  int segments = 0;
  double wall_time_s = 0.0;
  double objective = 0.0;
  double duration_s = 0.0;
};

struct BenchSummary {
  int group = 0;
  int runs = 0;
  int successes = 0;
  double success_rate = 0.0;
  double mean_time_s = 0.0;
  double mean_iterations = 0.0;
};

std::vector<BenchRun> runBench(int groups, int runs_per_group,
                               std::uint64_t seed, const SolverConfig& config,
                               std::vector<BenchSummary>* summaries = nullptr);
void writeBenchCsv(const std::string& path, const std::vector<BenchRun>& runs);

enum class SweepParam { Segments, WeightObstacle, WeightEffort };

struct SweepPoint {
  double value = 0.0;
  SolveReport report;
  double obstacle_exposure = 0.0;  // see obstacleExposure
  double effort_integral = 0.0;    // integral of ||jerk||^2
};

std::vector<SweepPoint> runSweep(const Scenario& scenario,
                                 const SolverConfig& config, SweepParam param,
                                 const std::vector<double>& values);
void writeSweepCsv(const std::string& path, SweepParam param,
                   const std::vector<SweepPoint>& points);

// Integral over time of max(1 - d_surface/safe_distance, 0), with d_surface
// the horizontal distance to the nearest obstacle surface. Zero iff the path
// keeps at least the safety distance everywhere on the grid.
double obstacleExposure(const FlatTrajectory& traj, const Scenario& scenario,
                        int samples_per_segment);
double effortIntegral(const FlatTrajectory& traj, int samples_per_segment);

// Time-sampled states, loads, and obstacle clearance; columns documented in
// the header row. The first row is the initial state.
void exportTrajectoryCsv(const std::string& path, const FlatTrajectory& traj,
                         const Scenario& scenario, double sample_dt_s,
                         double gravity = kDefaultGravity);

// Random normalized evaluation instance for derivative checks: a solvable
// random scenario, its warm-start waypoints with noise, and a perturbed
// duration.
struct CheckInstance {
  Scenario scenario;  // normalized
  int segments = 0;
  Eigen::MatrixXd waypoints;
  double log_duration = 0.0;
  double gravity = 0.0;  // normalized
};

CheckInstance makeCheckInstance(std::uint64_t seed, const SolverConfig& config);

struct GradCheckResult {
  double rel_error = 0.0;
  double analytic_norm = 0.0;
  double fd_norm = 0.0;
};

// Analytic gradient vs central differences at the instance's point.
GradCheckResult gradCheck(const CheckInstance& instance,
                          const SolverConfig& config, double fd_step = 1e-6);

}  // namespace dfto
