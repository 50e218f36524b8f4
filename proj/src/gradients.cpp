#include "dfto/gradients.hpp"

#include <cmath>

namespace dfto {

namespace {
const Eigen::Vector3d kDown(0.0, 0.0, 1.0);
}

double jerkWithGradient(const FlatPoint& fp, SampleGradient* g) {
  if (g != nullptr) g->jerk += 2.0 * fp.jerk;
  return fp.jerk.squaredNorm();
}

double speedWithGradient(const FlatPoint&, const FrameVectors& frame,
                         const PenaltyBand& band, int power,
                         SampleGradient* g) {
  const double q = frame.speed;
  const double value = band.value(q, power);
  if (g != nullptr && value > 0.0) {
    g->velocity += band.derivative(q, power) * frame.r1;
  }
  return value;
}

double sinGammaWithGradient(const FlatPoint& fp, const FrameVectors& frame,
                            const PenaltyBand& band, int power,
                            SampleGradient* g) {
  const double speed = frame.speed;
  const double q = -fp.velocity.z() / speed;
  const double value = band.value(q, power);
  if (g != nullptr && value > 0.0) {
    // d(-v_z/||v||)/dv = -(I - r1 r1')e3 / ||v||
    const Eigen::Vector3d dq =
        (-kDown + (fp.velocity.z() / speed) * frame.r1) / speed;
    g->velocity += band.derivative(q, power) * dq;
  }
  return value;
}

double loadWithGradient(const FlatPoint& fp, const FrameVectors& frame,
                        double load_value, LoadAxis axis,
                        const PenaltyBand& band, int power, double gravity,
                        SampleGradient* g) {
  const double value = band.value(load_value, power);
  if (g == nullptr || value == 0.0) return value;
  const double dgdq = band.derivative(load_value, power);
  switch (axis) {
    case LoadAxis::Nx: {
      g->acceleration += (dgdq / gravity) * frame.r1;
      // (I - r1 r1') n_g / ||v||, and r1' n_g is the load value itself.
      g->velocity += dgdq *
                     (frame.load_vector - load_value * frame.r1) / frame.speed;
      break;
    }
    case LoadAxis::Ny: {
      g->acceleration += (dgdq / gravity) * frame.r2;
      // dw2/dv = [e3]_x, so dq/dv = ((I - r2 r2') n_g) x e3 / ||w2||.
      const Eigen::Vector3d u = frame.load_vector - load_value * frame.r2;
      g->velocity += dgdq * u.cross(kDown) / frame.w2_norm;
      break;
    }
    case LoadAxis::Nz: {
      g->acceleration += (-dgdq / gravity) * frame.r3;
      // q = -n_g' r3; dw3/dv = 2 e3 v' - v_z I - v e3'.
      const Eigen::Vector3d u =
          frame.load_vector + load_value * frame.r3;  // (I - r3 r3') n_g
      const double vz = fp.velocity.z();
      const Eigen::Vector3d w3t_u = 2.0 * kDown.dot(u) * fp.velocity -
                                    vz * u - fp.velocity.dot(u) * kDown;
      g->velocity += dgdq * (-w3t_u / frame.w3_norm);
      break;
    }
  }
  return value;
}

double obstacleWithGradient(const FlatPoint& fp, const ObstacleField& field,
                            int power, SampleGradient* g) {
  const double phi = field.phi(fp.position);
  const double value = hingePower(phi, power);
  if (g != nullptr && value > 0.0) {
    const double c = hingePowerDerivative(phi, power) * (-2.0) /
                     (field.limit * field.limit);
    g->position.x() += c * (fp.position.x() - field.center.x());
    g->position.y() += c * (fp.position.y() - field.center.y());
  }
  return value;
}

void propagate(GradAccumulator& acc, const SplineSystem& system,
               const BoundaryState& start, const BoundaryState& finish,
               double duration, double time_cost_derivative) {
  const int n = system.segments();
  Eigen::MatrixXd adjoint = acc.by_coeffs;
  system.solveTransposeInPlace(adjoint);

  acc.by_waypoints.resize(n - 1, 3);
  for (int i = 1; i <= n - 1; ++i) {
    acc.by_waypoints.row(i - 1) = adjoint.row(system.waypointRow(i));
  }

  // Boundary rows of the rhs carry (T/N) v and (T/N)^2 a.
  const double inv_n = 1.0 / n;
  const double a_scale = 2.0 * duration * inv_n * inv_n;
  double boundary = adjoint.row(1).dot(start.velocity) * inv_n +
                    adjoint.row(2).dot(start.acceleration) * a_scale +
                    adjoint.row(6 * n - 2).dot(finish.velocity) * inv_n +
                    adjoint.row(6 * n - 1).dot(finish.acceleration) * a_scale;

  acc.by_duration += boundary + time_cost_derivative;
  acc.by_log_duration = duration * acc.by_duration;
}

double timeMappingGradient(double cost_by_duration, double log_duration) {
  return std::exp(log_duration) * cost_by_duration;
}

}  // namespace dfto
