#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace dfto {

// North-East-Down frame throughout: +z points down, altitude above ground is -z.
inline constexpr double kDefaultGravity = 9.81;  // m/s^2
// Below this velocity norm (or horizontal-velocity norm) the speed frame is undefined.
inline constexpr double kVelocityEps = 1e-6;

class DftoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ||v|| < v_eps: heading/flight-path angle and the speed frame are undefined.
class SingularVelocityError : public DftoError {
 public:
  using DftoError::DftoError;
};

// ||e3 x v|| < v_eps: vertical flight, the lateral frame axis is undefined.
class SingularVerticalError : public DftoError {
 public:
  using DftoError::DftoError;
};

// n_y = n_z = 0: bank angle undefined.
class ZeroNormalLoadError : public DftoError {
 public:
  using DftoError::DftoError;
};

class OutOfDomainError : public DftoError {
 public:
  using DftoError::DftoError;
};

class InvalidScenarioError : public DftoError {
 public:
  using DftoError::DftoError;
};

// Initial-guess construction failed (degenerate endpoints, unattainable climb, ...).
class InitFailureError : public DftoError {
 public:
  using DftoError::DftoError;
};

struct UavState {
  Eigen::Vector3d position{Eigen::Vector3d::Zero()};  // m, NED
  double speed = 0.0;              // m/s, > 0
  double heading = 0.0;            // rad, four-quadrant about +z
  double flight_path_angle = 0.0;  // rad, |gamma| < pi/2, positive climbing
};

// Load factors in the speed frame: tangential n_x, lateral n_y, normal n_z.
struct LoadControls {
  double nx = 0.0;
  double ny = 0.0;
  double nz = 1.0;  // level flight carries (0, 0, 1)
};

struct PhysicalControls {
  double thrust = 0.0;      // N
  double lift = 0.0;        // N
  double bank_angle = 0.0;  // rad
};

// Flat output and its time derivatives at one instant.
struct FlatPoint {
  Eigen::Vector3d position{Eigen::Vector3d::Zero()};
  Eigen::Vector3d velocity{Eigen::Vector3d::Zero()};
  Eigen::Vector3d acceleration{Eigen::Vector3d::Zero()};
  Eigen::Vector3d jerk{Eigen::Vector3d::Zero()};
};

// Speed-frame axes and the intermediate quantities the control maps share.
// r1 = v/||v||, r2 = w2/||w2||, r3 = w3/||w3||, with w2 = e3 x v, w3 = v x w2.
struct FrameVectors {
  Eigen::Vector3d r1{Eigen::Vector3d::Zero()};
  Eigen::Vector3d r2{Eigen::Vector3d::Zero()};
  Eigen::Vector3d r3{Eigen::Vector3d::Zero()};
  Eigen::Vector3d load_vector{Eigen::Vector3d::Zero()};  // a/g - e3
  Eigen::Vector3d w2{Eigen::Vector3d::Zero()};
  Eigen::Vector3d w3{Eigen::Vector3d::Zero()};
  double speed = 0.0;    // ||v||
  double w2_norm = 0.0;  // ||e3 x v||, equals horizontal speed
  double w3_norm = 0.0;  // equals speed * w2_norm
};

// Vertical cylinder of infinite height; only the horizontal projection matters.
struct Obstacle {
  Eigen::Vector2d center{Eigen::Vector2d::Zero()};  // m, (north, east)
  double radius = 0.0;                              // m
};

enum class TimeCostMode {
  MinTime,  // Q(T) = T
  Window,   // hinge penalty outside [window_min, window_max]
  Fixed,    // T fixed, removed from the decision vector
};

struct TimeCostSpec {
  TimeCostMode mode = TimeCostMode::MinTime;
  double window_min = 0.0;      // s, Window mode
  double window_max = 0.0;      // s, Window mode
  double fixed_duration = 0.0;  // s, Fixed mode
};

struct Scenario {
  UavState initial_state;
  UavState final_state;
  LoadControls initial_controls;
  LoadControls final_controls;

  double speed_min = 30.0;  // m/s
  double speed_max = 40.0;  // m/s
  double gamma_min = -10.0 * M_PI / 180.0;  // rad
  double gamma_max = 10.0 * M_PI / 180.0;   // rad
  double nx_min = -0.2;
  double nx_max = 0.2;
  double ny_min = -0.2;
  double ny_max = 0.2;
  double nz_min = 0.8;
  double nz_max = 1.2;

  std::vector<Obstacle> obstacles;
  double safe_distance = 100.0;  // m, added to every obstacle radius

  TimeCostSpec time_cost;
};

enum class GradientMode {
  Analytic,
  FiniteDifference,  // reference/benchmark path, central differences
};

struct SolverConfig {
  // Penalty weights.
  double weight_effort = 1e-3;
  double weight_obstacle = 1e3;
  double weight_speed = 1e3;
  double weight_gamma = 1e3;
  double weight_nx = 1e3;
  double weight_ny = 1e3;
  double weight_nz = 1e3;

  // Margin fractions: bounds are shrunk by (1 - margin) for state/control
  // penalties and inflated by (1 + margin) for obstacle clearance, so the
  // penalized region is entered strictly before the true bound is violated.
  double margin_obstacle = 0.05;
  double margin_speed = 0.05;
  double margin_gamma = 0.05;
  double margin_nx = 0.05;
  double margin_ny = 0.05;
  double margin_nz = 0.05;

  int samples_per_segment = 5;  // quadrature nodes per segment minus one
  int penalty_power = 3;        // exponent on the hinge penalties

  double grad_tolerance = 1e-3;  // stationarity threshold on ||grad||
  int lbfgs_memory = 8;
  int max_iterations = 5000;

  int segments = 0;              // 0 selects automatically from path length
  double segment_gain = 1.25;    // segments per minimum-turn-radius of path

  double gravity = kDefaultGravity;
  double velocity_eps = kVelocityEps;
  bool filter_inactive = true;
  GradientMode gradient_mode = GradientMode::Analytic;
  int trace = 0;  // >0: log every trace-th accepted iteration to stderr
};

// Unweighted integral of each penalty family plus the time cost;
// total = time_cost + sum of weight * integral.
struct CostBreakdown {
  double time_cost = 0.0;
  double effort = 0.0;
  double obstacle = 0.0;
  double speed = 0.0;
  double gamma = 0.0;
  double load_nx = 0.0;
  double load_ny = 0.0;
  double load_nz = 0.0;
  double total = 0.0;
};

// Worst violation of each original (unshrunk) bound over the sample grid;
// zero when satisfied. gamma is reported in sin(gamma) units.
struct FeasibilityReport {
  double speed = 0.0;
  double gamma = 0.0;
  double load_nx = 0.0;
  double load_ny = 0.0;
  double load_nz = 0.0;
  double obstacle = 0.0;  // m (or normalized length when evaluated pre-scaling)

  // Terminal states may sit exactly on a bound, so recovering them leaves
  // roundoff-sized excursions; those are not violations.
  static constexpr double kRoundoff = 1e-9;

  bool feasible() const {
    return worst() <= kRoundoff;
  }
  double worst() const {
    return std::max({speed, gamma, load_nx, load_ny, load_nz, obstacle});
  }
};

}  // namespace dfto
