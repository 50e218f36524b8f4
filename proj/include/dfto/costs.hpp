#pragma once

#include "dfto/flat_dynamics.hpp"
#include "dfto/spline.hpp"
#include "dfto/types.hpp"

#include <vector>

namespace dfto {

// Duration is optimized through T = exp(tau) so it stays positive without a
// constraint; d/dtau = T * d/dT.
double timeMapping(double log_duration);
double timeMappingInverse(double duration);

double hingePower(double phi, int power);            // max(phi, 0)^power
double hingePowerDerivative(double phi, int power);  // d/dphi of the above

// Symmetric range penalty on a scalar q:
//   phi(q) = ((q - center)/width)^2 - 1,  G = max(phi, 0)^power.
// width already carries the margin shrink, so G > 0 strictly before the true
// bound is reached.
struct PenaltyBand {
  double center = 0.0;
  double width = 1.0;

  // width = (1 - margin_fraction) * (hi - lo)/2.
  static PenaltyBand fromRange(double lo, double hi, double margin_fraction);

  double phi(double q) const {
    const double r = (q - center) / width;
    return r * r - 1.0;
  }
  double value(double q, int power) const { return hingePower(phi(q), power); }
  // dG/dq
  double derivative(double q, int power) const {
    return hingePowerDerivative(phi(q), power) * 2.0 * (q - center) /
           (width * width);
  }
  bool inside(double q) const { return std::abs(q - center) <= width; }
};

// Horizontal clearance penalty for one cylinder:
//   phi(p) = 1 - (d/limit)^2,  d = || (p_x, p_y) - center ||,
// with limit = (1 + margin)(radius + safe_distance). Quadratic in p, so the
// penalty is smooth everywhere including the cylinder axis.
struct ObstacleField {
  Eigen::Vector2d center{Eigen::Vector2d::Zero()};
  double limit = 0.0;

  double phi(const Eigen::Vector3d& position) const {
    const double dx = position.x() - center.x();
    const double dy = position.y() - center.y();
    return 1.0 - (dx * dx + dy * dy) / (limit * limit);
  }
  double value(const Eigen::Vector3d& position, int power) const {
    return hingePower(phi(position), power);
  }
};

enum class LoadAxis { Nx, Ny, Nz };

// Margin-adjusted penalty terms for one scenario. The gamma band acts on
// sin(gamma), which the flat map reaches without an arcsin.
struct PenaltyModel {
  PenaltyBand speed;
  PenaltyBand sin_gamma;
  PenaltyBand nx;
  PenaltyBand ny;
  PenaltyBand nz;
  std::vector<ObstacleField> obstacles;
  int power = 3;

  static PenaltyModel fromScenario(const Scenario& scenario,
                                   const SolverConfig& config);
};

double timeCost(double duration, const TimeCostSpec& spec, int power);
double timeCostDerivative(double duration, const TimeCostSpec& spec, int power);

// Single-sample integrands; the evaluator fuses these over the shared sample
// cache, tests exercise them directly.
double jerkIntegrand(const FlatPoint& fp);
double speedIntegrand(const FlatPoint& fp, const PenaltyBand& band, int power);
double sinGammaIntegrand(const FlatPoint& fp, const PenaltyBand& band,
                         int power, double v_eps = kVelocityEps);
double loadIntegrand(const FlatPoint& fp, LoadAxis axis,
                     const PenaltyBand& band, int power,
                     double gravity = kDefaultGravity,
                     double v_eps = kVelocityEps);
double obstacleIntegrand(const FlatPoint& fp,
                         const std::vector<ObstacleField>& fields, int power);

// Throws InvalidScenarioError with a description of the first violated
// requirement (degenerate bounds, terminal state out of bounds or inside an
// obstacle's safety disc, bad time-cost window, ...).
void validateScenario(const Scenario& scenario);

// Per-segment activity of each penalty family over the sample grid. An
// inactive entry is guaranteed to contribute exactly zero cost and gradient.
struct ActiveSets {
  std::vector<std::vector<int>> obstacles;   // active obstacle indices
  std::vector<bool> speed;
  std::vector<bool> sin_gamma;
  std::vector<bool> nx;
  std::vector<bool> ny;
  std::vector<bool> nz;
};

ActiveSets filterActive(const FlatTrajectory& traj, const Scenario& scenario,
                        const SolverConfig& config);

// One cached quadrature sample.
struct SampleData {
  FlatPoint point;
  FrameVectors frame;
  double nx = 0.0;
  double ny = 0.0;
  double nz = 0.0;
  double sin_gamma = 0.0;
};

// Discretized objective over an N-segment spline: time cost plus trapezoid
// quadrature of the weighted integrands, with analytic gradients pulled back
// through the banded system's adjoint. One instance owns one evaluation
// context; not safe for concurrent use.
class ObjectiveEvaluator {
 public:
  // gravity defaults to config.gravity; the override carries the rescaled
  // gravity of a normalized problem.
  ObjectiveEvaluator(int segments, const Scenario& scenario,
                     const SolverConfig& config);
  ObjectiveEvaluator(int segments, const Scenario& scenario,
                     const SolverConfig& config, double gravity);

  int segments() const { return n_; }
  int samplesPerSegment() const { return kappa_; }
  bool fixedDuration() const {
    return scenario_.time_cost.mode == TimeCostMode::Fixed;
  }
  // 3*(N-1) waypoint coordinates plus log-duration unless it is fixed.
  int dimension() const { return 3 * (n_ - 1) + (fixedDuration() ? 0 : 1); }

  const Scenario& scenario() const { return scenario_; }
  const SplineSystem& system() const { return system_; }
  const BoundaryState& startState() const { return start_; }
  const BoundaryState& finishState() const { return finish_; }

  Eigen::VectorXd pack(const Eigen::MatrixXd& waypoints,
                       double log_duration) const;
  void unpack(const Eigen::VectorXd& x, Eigen::MatrixXd& waypoints,
              double& log_duration) const;

  // Objective value; fills grad (resized to dimension()) when non-null.
  // Returns +infinity when a sample hits the speed-frame singularity or the
  // value overflows; grad is untouched in that case.
  double operator()(const Eigen::VectorXd& x, Eigen::VectorXd* grad);

  CostBreakdown evaluate(const Eigen::MatrixXd& waypoints, double log_duration,
                         Eigen::VectorXd* grad);

  // State of the most recent evaluate() call.
  const CostBreakdown& lastBreakdown() const { return breakdown_; }
  bool lastSingular() const { return singular_; }
  double lastDuration() const { return duration_; }
  const std::vector<SampleData>& lastSamples() const { return samples_; }
  FeasibilityReport lastFeasibility() const;  // original, unshrunk bounds
  FlatTrajectory lastTrajectory() const;

 private:
  void init();

  int n_;
  int kappa_;
  Scenario scenario_;
  SolverConfig config_;
  double gravity_;
  SplineSystem system_;
  BasisCache basis_;
  PenaltyModel penalties_;
  BoundaryState start_;
  BoundaryState finish_;

  // last-evaluation state
  Eigen::MatrixXd waypoints_;
  Eigen::MatrixXd coeffs_;
  double duration_ = 0.0;
  CostBreakdown breakdown_;
  bool singular_ = false;
  std::vector<SampleData> samples_;  // segment-major, (kappa+1) per segment

  // scratch, preallocated
  Eigen::MatrixXd rhs_;
  Eigen::MatrixXd cost_by_coeffs_;
  std::vector<Eigen::Vector3d> gp_, gv_, ga_, gj_;
  std::vector<double> weighted_g_;
  std::vector<double> dist2_;
};

}  // namespace dfto
