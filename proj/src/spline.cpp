#include "dfto/spline.hpp"

#include <algorithm>
#include <cmath>

namespace dfto {

Eigen::Matrix<double, 6, 1> polyBasis(double tau, int order) {
  Eigen::Matrix<double, 6, 1> b = Eigen::Matrix<double, 6, 1>::Zero();
  if (order < 0 || order > 5) return b;
  double fact = 1.0;
  for (int k = 2; k <= order; ++k) fact *= k;
  double tp = 1.0;
  for (int j = order; j < 6; ++j) {
    b(j) = fact * tp;
    tp *= tau;
    // falling-factorial update: j!/(j-order)! -> (j+1)!/(j+1-order)!
    fact *= static_cast<double>(j + 1) / (j + 1 - order);
  }
  return b;
}

BandedMatrix::BandedMatrix(int size, int lower, int upper) {
  resize(size, lower, upper);
}

void BandedMatrix::resize(int size, int lower, int upper) {
  size_ = size;
  lower_ = lower;
  upper_ = upper;
  data_.assign(static_cast<size_t>(lower + upper + 1) * size, 0.0);
}

void BandedMatrix::setZero() { std::fill(data_.begin(), data_.end(), 0.0); }

void BandedMatrix::factorize() {
  for (int k = 0; k <= size_ - 2; ++k) {
    const int im = std::min(k + lower_, size_ - 1);
    const double piv = operator()(k, k);
    for (int i = k + 1; i <= im; ++i) {
      if (operator()(i, k) != 0.0) operator()(i, k) /= piv;
    }
    const int jm = std::min(k + upper_, size_ - 1);
    for (int j = k + 1; j <= jm; ++j) {
      const double c = operator()(k, j);
      if (c != 0.0) {
        for (int i = k + 1; i <= im; ++i) {
          if (operator()(i, k) != 0.0) operator()(i, j) -= operator()(i, k) * c;
        }
      }
    }
  }
}

void BandedMatrix::solveInPlace(Eigen::Ref<Eigen::MatrixXd> b) const {
  for (int j = 0; j <= size_ - 1; ++j) {
    const int im = std::min(j + lower_, size_ - 1);
    for (int i = j + 1; i <= im; ++i) {
      if (operator()(i, j) != 0.0) b.row(i) -= operator()(i, j) * b.row(j);
    }
  }
  for (int j = size_ - 1; j >= 0; --j) {
    b.row(j) /= operator()(j, j);
    const int im = std::max(0, j - upper_);
    for (int i = j - 1; i >= im; --i) {
      if (operator()(i, j) != 0.0) b.row(i) -= operator()(i, j) * b.row(j);
    }
  }
}

void BandedMatrix::solveTransposeInPlace(Eigen::Ref<Eigen::MatrixXd> b) const {
  for (int j = 0; j <= size_ - 1; ++j) {
    b.row(j) /= operator()(j, j);
    const int im = std::min(j + upper_, size_ - 1);
    for (int i = j + 1; i <= im; ++i) {
      if (operator()(j, i) != 0.0) b.row(i) -= operator()(j, i) * b.row(j);
    }
  }
  for (int j = size_ - 1; j >= 0; --j) {
    const int im = std::max(0, j - lower_);
    for (int i = j - 1; i >= im; --i) {
      if (operator()(j, i) != 0.0) b.row(i) -= operator()(j, i) * b.row(j);
    }
  }
}

Eigen::MatrixXd BandedMatrix::dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size_, size_);
  for (int i = 0; i < size_; ++i) {
    const int lo = std::max(0, i - lower_);
    const int hi = std::min(size_ - 1, i + upper_);
    for (int j = lo; j <= hi; ++j) m(i, j) = operator()(i, j);
  }
  return m;
}

SplineSystem::SplineSystem(int segments) : n_(segments) {
  if (segments < 1) {
    throw OutOfDomainError("spline system needs at least one segment");
  }
  banded_.resize(6 * n_, 6, 6);

  const auto b0 = [](int order) { return polyBasis(0.0, order); };
  const auto b1 = [](int order) { return polyBasis(1.0, order); };

  banded_(0, 0) = 1.0;  // b(0)
  banded_(1, 1) = 1.0;  // b'(0)
  banded_(2, 2) = 2.0;  // b''(0)

  for (int i = 1; i <= n_ - 1; ++i) {
    const int r = 6 * i - 3;   // first row of this junction block
    const int cl = 6 * (i - 1);  // left-segment columns
    const int cr = 6 * i;        // right-segment columns
    // Continuity of orders 3, 4, then the waypoint row, then orders 0..2.
    const int order_of_row[6] = {3, 4, -1, 0, 1, 2};
    for (int m = 0; m < 6; ++m) {
      const int order = order_of_row[m];
      if (order < 0) {
        const auto w = b1(0);
        for (int j = 0; j < 6; ++j) banded_(r + m, cl + j) = w(j);
        continue;
      }
      const auto left = b1(order);
      const auto right = b0(order);
      for (int j = 0; j < 6; ++j) {
        if (left(j) != 0.0) banded_(r + m, cl + j) = left(j);
        if (right(j) != 0.0) banded_(r + m, cr + j) = -right(j);
      }
    }
  }

  const int t = 6 * n_ - 3;
  const int ct = 6 * (n_ - 1);
  for (int order = 0; order < 3; ++order) {
    const auto row = b1(order);
    for (int j = 0; j < 6; ++j) {
      if (row(j) != 0.0) banded_(t + order, ct + j) = row(j);
    }
  }

  banded_.factorize();
}

Eigen::MatrixXd SplineSystem::rhs(const BoundaryState& start,
                                  const BoundaryState& finish,
                                  const Eigen::MatrixXd& waypoints,
                                  double duration) const {
  if (waypoints.rows() != n_ - 1 || waypoints.cols() != 3) {
    throw OutOfDomainError("waypoint matrix must be (segments-1) x 3");
  }
  if (!(duration > 0.0)) {
    throw OutOfDomainError("duration must be positive");
  }
  const double dt = duration / n_;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows(), 3);
  d.row(0) = start.position.transpose();
  d.row(1) = dt * start.velocity.transpose();
  d.row(2) = dt * dt * start.acceleration.transpose();
  for (int i = 1; i <= n_ - 1; ++i) {
    d.row(waypointRow(i)) = waypoints.row(i - 1);
  }
  d.row(6 * n_ - 3) = finish.position.transpose();
  d.row(6 * n_ - 2) = dt * finish.velocity.transpose();
  d.row(6 * n_ - 1) = dt * dt * finish.acceleration.transpose();
  return d;
}

Eigen::MatrixXd SplineSystem::solve(const Eigen::MatrixXd& rhs) const {
  Eigen::MatrixXd coeffs = rhs;
  solveInPlace(coeffs);
  return coeffs;
}

void SplineSystem::solveInPlace(Eigen::MatrixXd& rhs_to_coeffs) const {
  banded_.solveInPlace(rhs_to_coeffs);
}

void SplineSystem::solveTransposeInPlace(Eigen::MatrixXd& grad) const {
  banded_.solveTransposeInPlace(grad);
}

Eigen::Vector3d FlatTrajectory::derivative(double t, int order) const {
  if (order < 0 || order > 5) {
    throw OutOfDomainError("derivative order must be in [0, 5]");
  }
  const double slack = 1e-9 * std::max(1.0, duration);
  if (t < -slack || t > duration + slack) {
    throw OutOfDomainError("trajectory evaluated outside [0, duration]");
  }
  const double dt = segmentDuration();
  int i = static_cast<int>(std::floor(t / dt));
  i = std::clamp(i, 0, segments - 1);
  const double tau = t / dt - i;
  Eigen::Vector3d value =
      coeffs.block<6, 3>(6 * i, 0).transpose() * polyBasis(tau, order);
  return value * std::pow(static_cast<double>(segments) / duration, order);
}

FlatPoint FlatTrajectory::evaluate(double t) const {
  FlatPoint p;
  p.position = derivative(t, 0);
  p.velocity = derivative(t, 1);
  p.acceleration = derivative(t, 2);
  p.jerk = derivative(t, 3);
  return p;
}

FlatTrajectory buildTrajectory(const SplineSystem& system,
                               const BoundaryState& start,
                               const BoundaryState& finish,
                               const Eigen::MatrixXd& waypoints,
                               double duration) {
  FlatTrajectory traj;
  traj.segments = system.segments();
  traj.duration = duration;
  traj.waypoints = waypoints;
  traj.start = start;
  traj.finish = finish;
  traj.coeffs = system.solve(system.rhs(start, finish, waypoints, duration));
  return traj;
}

Eigen::MatrixXd effortGram(const SplineSystem& system) {
  const int n = system.segments();
  const int m = n - 1;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(system.rows(), m);
  for (int j = 1; j <= m; ++j) rhs(system.waypointRow(j), j - 1) = 1.0;
  const Eigen::MatrixXd columns = system.solve(rhs);

  // Per-segment Gram of the third basis derivative on tau in [0, 1]:
  // entries (i, j) with i, j >= 3 are i(i-1)(i-2) j(j-1)(j-2) / (i + j - 5).
  Eigen::Matrix<double, 6, 6> basis_gram = Eigen::Matrix<double, 6, 6>::Zero();
  basis_gram.block<3, 3>(3, 3) << 36, 72, 120, 72, 192, 360, 120, 360, 720;

  // dt integration contributes T/N per segment and each jerk factor (N/T)^3.
  const double scale = std::pow(static_cast<double>(n), 5);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
  for (int s = 0; s < n; ++s) {
    const auto block = columns.middleRows(kCoeffsPerSegment * s,
                                          kCoeffsPerSegment);
    gram.noalias() += scale * block.transpose() * basis_gram * block;
  }
  return gram;
}

BasisCache::BasisCache(int samples_per_segment)
    : nodes_(samples_per_segment + 1) {
  if (samples_per_segment < 1) {
    throw OutOfDomainError("need at least one quadrature sample per segment");
  }
  for (int order = 0; order < 6; ++order) {
    values_[order].resize(nodes_);
    for (int k = 0; k < nodes_; ++k) {
      const double tau = static_cast<double>(k) / samples_per_segment;
      values_[order][k] = polyBasis(tau, order);
    }
  }
}

}  // namespace dfto
