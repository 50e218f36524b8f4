#pragma once

#include "dfto/costs.hpp"
#include "dfto/initializer.hpp"
#include "dfto/lbfgs.hpp"

namespace dfto {

struct SolveReport {
  bool converged = false;  // feasible with ||grad|| <= tolerance at the end
  bool feasible = false;   // original bounds hold on the sample grid
  int iterations = 0;
  int evaluations = 0;
  int first_feasible_iteration = -1;  // -1: never feasible
  int segments = 0;
  double grad_norm = 0.0;      // normalized problem, solver coordinates
  double duration_s = 0.0;     // physical
  double setup_time_s = 0.0;   // initial guess + evaluator construction
  double opt_time_s = 0.0;     // optimization loop only
  double wall_time_s = 0.0;    // setup + optimization
  CostBreakdown cost;          // physical units
  FeasibilityReport residuals; // physical units
  LbfgsStatus status = LbfgsStatus::MaxIterations;
};

struct SolveResult {
  SolveReport report;
  FlatTrajectory trajectory;  // physical units
};

// Full pipeline: validate, warm-start from the turn/straight/turn path,
// normalize, minimize the penalty objective, de-normalize, and report in
// physical units. Deterministic; a single call is single-threaded.
SolveResult solve(const Scenario& scenario, const SolverConfig& config = {});

// Worst-violation residuals of a physical trajectory on the same sample grid
// the solver uses.
FeasibilityReport feasibilityCheck(const FlatTrajectory& trajectory,
                                   const Scenario& scenario,
                                   int samples_per_segment,
                                   double gravity = kDefaultGravity,
                                   double v_eps = kVelocityEps);

}  // namespace dfto
