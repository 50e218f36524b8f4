#pragma once

#include "dfto/costs.hpp"

namespace dfto {

// Partials of one weighted integrand sum with respect to the flat sample.
struct SampleGradient {
  Eigen::Vector3d position{Eigen::Vector3d::Zero()};
  Eigen::Vector3d velocity{Eigen::Vector3d::Zero()};
  Eigen::Vector3d acceleration{Eigen::Vector3d::Zero()};
  Eigen::Vector3d jerk{Eigen::Vector3d::Zero()};
};

// Each function returns the integrand value at the sample and accumulates its
// unweighted partials into g (pass nullptr for value only). The frame must
// come from the same sample.

double jerkWithGradient(const FlatPoint& fp, SampleGradient* g);

double speedWithGradient(const FlatPoint& fp, const FrameVectors& frame,
                         const PenaltyBand& band, int power, SampleGradient* g);

double sinGammaWithGradient(const FlatPoint& fp, const FrameVectors& frame,
                            const PenaltyBand& band, int power,
                            SampleGradient* g);

double loadWithGradient(const FlatPoint& fp, const FrameVectors& frame,
                        double load_value, LoadAxis axis,
                        const PenaltyBand& band, int power, double gravity,
                        SampleGradient* g);

double obstacleWithGradient(const FlatPoint& fp, const ObstacleField& field,
                            int power, SampleGradient* g);

// Objective partials accumulated over the sample grid, before and after the
// pull-back through the boundary/continuity system.
struct GradAccumulator {
  Eigen::MatrixXd by_coeffs;      // 6N x 3
  double by_duration = 0.0;       // explicit quadrature/scaling channel
  Eigen::MatrixXd by_waypoints;   // (N-1) x 3, filled by propagate
  double by_log_duration = 0.0;   // filled by propagate
};

// Pulls by_coeffs back through the adjoint of the banded system, adds the
// duration dependence of the boundary rows of the rhs (they carry T/N and
// (T/N)^2) and the explicit channel plus the time-cost derivative, then maps
// onto log-duration. Cost of one call: one banded transpose solve, O(N).
void propagate(GradAccumulator& acc, const SplineSystem& system,
               const BoundaryState& start, const BoundaryState& finish,
               double duration, double time_cost_derivative);

// d/d(log T) from d/dT at T = exp(log_duration).
double timeMappingGradient(double cost_by_duration, double log_duration);

}  // namespace dfto
