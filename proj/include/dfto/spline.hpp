#pragma once

#include "dfto/types.hpp"

#include <array>
#include <vector>

namespace dfto {

inline constexpr int kCoeffsPerSegment = 6;  // quintic

// order-th derivative of the monomial basis [1, tau, ..., tau^5] at tau.
Eigen::Matrix<double, 6, 1> polyBasis(double tau, int order);

// Square banded matrix with in-place LU (no pivoting) and forward/adjoint
// solves. Storage is diagonal-major: entry (i, j) lives at
// data[(i - j + upper) * size + j], valid for -upper <= i - j <= lower.
class BandedMatrix {
 public:
  BandedMatrix() = default;
  BandedMatrix(int size, int lower, int upper);

  void resize(int size, int lower, int upper);
  void setZero();

  int size() const { return size_; }
  int lowerBandwidth() const { return lower_; }
  int upperBandwidth() const { return upper_; }

  double& operator()(int i, int j) {
    return data_[static_cast<size_t>(i - j + upper_) * size_ + j];
  }
  double operator()(int i, int j) const {
    return data_[static_cast<size_t>(i - j + upper_) * size_ + j];
  }

  // In-place LU without pivoting; valid for the diagonally-dominant systems
  // assembled here. Call once, then solve repeatedly.
  void factorize();

  // Solves A X = B in place (B: size x cols).
  void solveInPlace(Eigen::Ref<Eigen::MatrixXd> b) const;
  // Solves A^T X = B in place; the adjoint pass of gradient propagation.
  void solveTransposeInPlace(Eigen::Ref<Eigen::MatrixXd> b) const;

  Eigen::MatrixXd dense() const;  // pre-factorization layout, for tests

 private:
  int size_ = 0;
  int lower_ = 0;
  int upper_ = 0;
  std::vector<double> data_;
};

struct BoundaryState {
  Eigen::Vector3d position{Eigen::Vector3d::Zero()};
  Eigen::Vector3d velocity{Eigen::Vector3d::Zero()};
  Eigen::Vector3d acceleration{Eigen::Vector3d::Zero()};
};

// Boundary/continuity system for an N-segment uniform quintic spline in the
// normalized per-segment time tau in [0, 1]. The matrix depends only on N and
// is factorized once at construction; solving for coefficients is O(N).
//
// Row layout (6N rows): 3 head rows clamp position/velocity/acceleration at
// tau=0 of the first segment; each interior junction contributes continuity of
// derivative orders 3 and 4, the waypoint row, then continuity of orders 0..2
// (the uniform segment duration cancels from the continuity rows); 3 tail rows
// clamp the end of the last segment. This junction ordering puts a nonzero on
// every assembled diagonal, which the pivot-free LU requires. Lower and upper
// bandwidth are both 6.
class SplineSystem {
 public:
  explicit SplineSystem(int segments);

  int segments() const { return n_; }
  int rows() const { return kCoeffsPerSegment * n_; }

  // Right-hand side for given boundary states, interior waypoints
  // ((N-1) x 3), and total duration. Velocity rows carry T/N, acceleration
  // rows (T/N)^2.
  Eigen::MatrixXd rhs(const BoundaryState& start, const BoundaryState& finish,
                      const Eigen::MatrixXd& waypoints, double duration) const;

  // Coefficients (6N x 3) of the spline through the rhs; banded solve.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;
  void solveInPlace(Eigen::MatrixXd& rhs_to_coeffs) const;

  // Adjoint solve used to pull objective gradients from coefficient space
  // back to rhs space.
  void solveTransposeInPlace(Eigen::MatrixXd& grad) const;

  // Row of the rhs holding interior waypoint p_i, i in [1, N-1].
  int waypointRow(int junction) const { return 6 * junction - 1; }

 private:
  int n_;
  BandedMatrix banded_;
};

// Piecewise-quintic flat trajectory. Coefficients are stored against the
// normalized per-segment time, so the n-th time derivative carries (N/T)^n.
struct FlatTrajectory {
  int segments = 0;
  double duration = 0.0;             // s
  Eigen::MatrixXd waypoints;         // (N-1) x 3
  Eigen::MatrixXd coeffs;            // 6N x 3
  BoundaryState start;
  BoundaryState finish;

  double segmentDuration() const { return duration / segments; }

  // order-th time derivative at t in [0, duration]; order 0..5.
  // Throws OutOfDomainError outside the domain.
  Eigen::Vector3d derivative(double t, int order) const;

  // Position through jerk at t.
  FlatPoint evaluate(double t) const;
};

// Solves for the coefficients and packages the trajectory.
FlatTrajectory buildTrajectory(const SplineSystem& system,
                               const BoundaryState& start,
                               const BoundaryState& finish,
                               const Eigen::MatrixXd& waypoints,
                               double duration);

// Gram matrix of the spline's exact jerk energy over the interior waypoints
// at unit total duration. For fixed boundary states the waypoint-to-
// coefficient map is affine, so per axis
//   integral ||d^3 p / dt^3||^2 dt  =  w^T Q w  +  (affine in w),
// and Q is symmetric positive definite, (N-1) x (N-1), a function of the
// segment count alone. A different total duration T rescales Q by (1/T)^5.
Eigen::MatrixXd effortGram(const SplineSystem& system);

// Basis values b^(n)(k/kappa) for n = 0..5, k = 0..kappa, shared by every
// segment of the quadrature grid.
class BasisCache {
 public:
  explicit BasisCache(int samples_per_segment);

  int nodes() const { return nodes_; }  // kappa + 1
  const Eigen::Matrix<double, 6, 1>& value(int order, int node) const {
    return values_[order][node];
  }

 private:
  int nodes_;
  std::array<std::vector<Eigen::Matrix<double, 6, 1>>, 6> values_;
};

}  // namespace dfto
