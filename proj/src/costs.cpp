#include "dfto/costs.hpp"

#include "dfto/gradients.hpp"

#include <cmath>
#include <limits>

namespace dfto {

namespace {
const Eigen::Vector3d kDown(0.0, 0.0, 1.0);
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

double timeMapping(double log_duration) { return std::exp(log_duration); }

double timeMappingInverse(double duration) {
  if (!(duration > 0.0)) {
    throw OutOfDomainError("duration must be positive");
  }
  return std::log(duration);
}

double hingePower(double phi, int power) {
  if (phi <= 0.0) return 0.0;
  double v = phi;
  for (int k = 1; k < power; ++k) v *= phi;
  return v;
}

double hingePowerDerivative(double phi, int power) {
  if (phi <= 0.0) return 0.0;
  double v = static_cast<double>(power);
  for (int k = 1; k < power; ++k) v *= phi;
  return v;
}

PenaltyBand PenaltyBand::fromRange(double lo, double hi,
                                   double margin_fraction) {
  if (!(hi > lo)) {
    throw InvalidScenarioError("penalty range must have positive width");
  }
  if (!(margin_fraction >= 0.0 && margin_fraction < 1.0)) {
    throw InvalidScenarioError("margin fraction must lie in [0, 1)");
  }
  PenaltyBand band;
  band.center = 0.5 * (lo + hi);
  band.width = (1.0 - margin_fraction) * 0.5 * (hi - lo);
  return band;
}

PenaltyModel PenaltyModel::fromScenario(const Scenario& scenario,
                                        const SolverConfig& config) {
  PenaltyModel m;
  m.power = config.penalty_power;
  m.speed = PenaltyBand::fromRange(scenario.speed_min, scenario.speed_max,
                                   config.margin_speed);
  m.sin_gamma =
      PenaltyBand::fromRange(std::sin(scenario.gamma_min),
                             std::sin(scenario.gamma_max), config.margin_gamma);
  m.nx = PenaltyBand::fromRange(scenario.nx_min, scenario.nx_max,
                                config.margin_nx);
  m.ny = PenaltyBand::fromRange(scenario.ny_min, scenario.ny_max,
                                config.margin_ny);
  m.nz = PenaltyBand::fromRange(scenario.nz_min, scenario.nz_max,
                                config.margin_nz);
  m.obstacles.reserve(scenario.obstacles.size());
  for (const Obstacle& o : scenario.obstacles) {
    ObstacleField f;
    f.center = o.center;
    f.limit =
        (1.0 + config.margin_obstacle) * (o.radius + scenario.safe_distance);
    m.obstacles.push_back(f);
  }
  return m;
}

double timeCost(double duration, const TimeCostSpec& spec, int power) {
  switch (spec.mode) {
    case TimeCostMode::MinTime:
      return duration;
    case TimeCostMode::Window: {
      const PenaltyBand band{0.5 * (spec.window_min + spec.window_max),
                             0.5 * (spec.window_max - spec.window_min)};
      return band.value(duration, power);
    }
    case TimeCostMode::Fixed:
      return 0.0;
  }
  return 0.0;
}

double timeCostDerivative(double duration, const TimeCostSpec& spec,
                          int power) {
  switch (spec.mode) {
    case TimeCostMode::MinTime:
      return 1.0;
    case TimeCostMode::Window: {
      const PenaltyBand band{0.5 * (spec.window_min + spec.window_max),
                             0.5 * (spec.window_max - spec.window_min)};
      return band.derivative(duration, power);
    }
    case TimeCostMode::Fixed:
      return 0.0;
  }
  return 0.0;
}

double jerkIntegrand(const FlatPoint& fp) { return fp.jerk.squaredNorm(); }

double speedIntegrand(const FlatPoint& fp, const PenaltyBand& band,
                      int power) {
  return band.value(fp.velocity.norm(), power);
}

double sinGammaIntegrand(const FlatPoint& fp, const PenaltyBand& band,
                         int power, double v_eps) {
  const double speed = fp.velocity.norm();
  if (speed < v_eps) {
    throw SingularVelocityError("flight-path angle undefined: ||v|| < v_eps");
  }
  return band.value(-fp.velocity.z() / speed, power);
}

double loadIntegrand(const FlatPoint& fp, LoadAxis axis,
                     const PenaltyBand& band, int power, double gravity,
                     double v_eps) {
  const FrameVectors f = speedFrame(fp.velocity, fp.acceleration, gravity,
                                    v_eps);
  double q = 0.0;
  switch (axis) {
    case LoadAxis::Nx: q = f.load_vector.dot(f.r1); break;
    case LoadAxis::Ny: q = f.load_vector.dot(f.r2); break;
    case LoadAxis::Nz: q = -f.load_vector.dot(f.r3); break;
  }
  return band.value(q, power);
}

double obstacleIntegrand(const FlatPoint& fp,
                         const std::vector<ObstacleField>& fields, int power) {
  double sum = 0.0;
  for (const ObstacleField& f : fields) sum += f.value(fp.position, power);
  return sum;
}

void validateScenario(const Scenario& s) {
  const auto reject = [](const std::string& what) {
    throw InvalidScenarioError(what);
  };
  if (!(s.speed_min > 0.0 && s.speed_max > s.speed_min)) {
    reject("speed bounds must satisfy 0 < speed_min < speed_max");
  }
  if (!(s.gamma_min > -M_PI / 2 && s.gamma_max < M_PI / 2 &&
        s.gamma_max > s.gamma_min)) {
    reject("flight-path bounds must satisfy -pi/2 < gamma_min < gamma_max < pi/2");
  }
  if (!(s.nx_max > s.nx_min) || !(s.ny_max > s.ny_min) ||
      !(s.nz_max > s.nz_min)) {
    reject("load-factor bounds must have positive width");
  }
  if (!(s.safe_distance >= 0.0)) reject("safe distance must be non-negative");
  for (const Obstacle& o : s.obstacles) {
    if (!(o.radius > 0.0)) reject("obstacle radius must be positive");
  }
  if (s.time_cost.mode == TimeCostMode::Window &&
      !(s.time_cost.window_min >= 0.0 &&
        s.time_cost.window_max > s.time_cost.window_min)) {
    reject("time window must satisfy 0 <= window_min < window_max");
  }
  if (s.time_cost.mode == TimeCostMode::Fixed &&
      !(s.time_cost.fixed_duration > 0.0)) {
    reject("fixed duration must be positive");
  }
  for (const UavState* st : {&s.initial_state, &s.final_state}) {
    if (!(st->speed >= s.speed_min && st->speed <= s.speed_max)) {
      reject("terminal speed outside the speed bounds");
    }
    if (!(st->flight_path_angle >= s.gamma_min &&
          st->flight_path_angle <= s.gamma_max)) {
      reject("terminal flight-path angle outside bounds");
    }
    for (const Obstacle& o : s.obstacles) {
      const double d =
          (st->position.head<2>() - o.center).norm();
      if (d < o.radius + s.safe_distance) {
        reject("terminal state inside an obstacle safety disc");
      }
    }
  }
  for (const LoadControls* u : {&s.initial_controls, &s.final_controls}) {
    if (!(u->nx >= s.nx_min && u->nx <= s.nx_max && u->ny >= s.ny_min &&
          u->ny <= s.ny_max && u->nz >= s.nz_min && u->nz <= s.nz_max)) {
      reject("terminal load factors outside bounds");
    }
  }
}

ActiveSets filterActive(const FlatTrajectory& traj, const Scenario& scenario,
                        const SolverConfig& config) {
  const PenaltyModel model = PenaltyModel::fromScenario(scenario, config);
  const int n = traj.segments;
  const int kappa = config.samples_per_segment;
  const double dt = traj.segmentDuration() / kappa;

  ActiveSets sets;
  sets.obstacles.assign(n, {});
  sets.speed.assign(n, false);
  sets.sin_gamma.assign(n, false);
  sets.nx.assign(n, false);
  sets.ny.assign(n, false);
  sets.nz.assign(n, false);

  std::vector<FlatPoint> pts(kappa + 1);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k <= kappa; ++k) {
      pts[k] = traj.evaluate(i * traj.segmentDuration() + k * dt);
    }
    double spacing = 0.0;
    for (int k = 0; k < kappa; ++k) {
      spacing = std::max(
          spacing, (pts[k + 1].position - pts[k].position).norm());
    }
    for (size_t j = 0; j < model.obstacles.size(); ++j) {
      const double rho = model.obstacles[j].limit + spacing;
      for (int k = 0; k <= kappa; ++k) {
        const double d =
            (pts[k].position.head<2>() - model.obstacles[j].center).norm();
        if (d < rho) {
          sets.obstacles[i].push_back(static_cast<int>(j));
          break;
        }
      }
    }
    for (int k = 0; k <= kappa; ++k) {
      const FrameVectors f =
          speedFrame(pts[k].velocity, pts[k].acceleration, config.gravity,
                     config.velocity_eps);
      if (!model.speed.inside(f.speed)) sets.speed[i] = true;
      if (!model.sin_gamma.inside(-pts[k].velocity.z() / f.speed)) {
        sets.sin_gamma[i] = true;
      }
      if (!model.nx.inside(f.load_vector.dot(f.r1))) sets.nx[i] = true;
      if (!model.ny.inside(f.load_vector.dot(f.r2))) sets.ny[i] = true;
      if (!model.nz.inside(-f.load_vector.dot(f.r3))) sets.nz[i] = true;
    }
  }
  return sets;
}

ObjectiveEvaluator::ObjectiveEvaluator(int segments, const Scenario& scenario,
                                       const SolverConfig& config)
    : ObjectiveEvaluator(segments, scenario, config, config.gravity) {}

ObjectiveEvaluator::ObjectiveEvaluator(int segments, const Scenario& scenario,
                                       const SolverConfig& config,
                                       double gravity)
    : n_(segments),
      kappa_(config.samples_per_segment),
      scenario_(scenario),
      config_(config),
      gravity_(gravity),
      system_(segments),
      basis_(config.samples_per_segment),
      penalties_(PenaltyModel::fromScenario(scenario, config)) {
  init();
}

void ObjectiveEvaluator::init() {
  const FlatPoint p0 = inverseMap(scenario_.initial_state,
                                  scenario_.initial_controls, gravity_);
  const FlatPoint pf = inverseMap(scenario_.final_state,
                                  scenario_.final_controls, gravity_);
  start_ = {p0.position, p0.velocity, p0.acceleration};
  finish_ = {pf.position, pf.velocity, pf.acceleration};

  samples_.resize(static_cast<size_t>(n_) * (kappa_ + 1));
  rhs_.resize(6 * n_, 3);
  cost_by_coeffs_.resize(6 * n_, 3);
  coeffs_.resize(6 * n_, 3);
  waypoints_.resize(n_ - 1, 3);
  gp_.resize(kappa_ + 1);
  gv_.resize(kappa_ + 1);
  ga_.resize(kappa_ + 1);
  gj_.resize(kappa_ + 1);
  weighted_g_.resize(kappa_ + 1);
  dist2_.resize(kappa_ + 1);
}

Eigen::VectorXd ObjectiveEvaluator::pack(const Eigen::MatrixXd& waypoints,
                                         double log_duration) const {
  Eigen::VectorXd x(dimension());
  for (int i = 0; i < n_ - 1; ++i) {
    x.segment<3>(3 * i) = waypoints.row(i).transpose();
  }
  if (!fixedDuration()) x(3 * (n_ - 1)) = log_duration;
  return x;
}

void ObjectiveEvaluator::unpack(const Eigen::VectorXd& x,
                                Eigen::MatrixXd& waypoints,
                                double& log_duration) const {
  waypoints.resize(n_ - 1, 3);
  for (int i = 0; i < n_ - 1; ++i) {
    waypoints.row(i) = x.segment<3>(3 * i).transpose();
  }
  if (fixedDuration()) {
    log_duration = timeMappingInverse(scenario_.time_cost.fixed_duration);
  } else {
    log_duration = x(3 * (n_ - 1));
  }
}

double ObjectiveEvaluator::operator()(const Eigen::VectorXd& x,
                                      Eigen::VectorXd* grad) {
  double log_duration = 0.0;
  unpack(x, waypoints_, log_duration);
  const CostBreakdown bd = evaluate(waypoints_, log_duration, grad);
  return bd.total;
}

CostBreakdown ObjectiveEvaluator::evaluate(const Eigen::MatrixXd& waypoints,
                                           double log_duration,
                                           Eigen::VectorXd* grad) {
  waypoints_ = waypoints;
  duration_ = fixedDuration() ? scenario_.time_cost.fixed_duration
                              : timeMapping(log_duration);
  breakdown_ = CostBreakdown{};
  singular_ = true;
  breakdown_.total = kInf;
  if (!std::isfinite(duration_) || duration_ <= 0.0) return breakdown_;

  rhs_ = system_.rhs(start_, finish_, waypoints, duration_);
  coeffs_ = rhs_;
  system_.solveInPlace(coeffs_);

  const double s1 = n_ / duration_;
  const double s2 = s1 * s1;
  const double s3 = s2 * s1;

  // Pass 1: sample the spline and the frame quantities.
  for (int i = 0; i < n_; ++i) {
    const auto ci = coeffs_.block<6, 3>(6 * i, 0);
    for (int k = 0; k <= kappa_; ++k) {
      SampleData& s = samples_[static_cast<size_t>(i) * (kappa_ + 1) + k];
      s.point.position = ci.transpose() * basis_.value(0, k);
      s.point.velocity = s1 * (ci.transpose() * basis_.value(1, k));
      s.point.acceleration = s2 * (ci.transpose() * basis_.value(2, k));
      s.point.jerk = s3 * (ci.transpose() * basis_.value(3, k));
      if (!trySpeedFrame(s.point.velocity, s.point.acceleration, gravity_,
                         config_.velocity_eps, s.frame)) {
        return breakdown_;  // singular sample: +inf, no gradient
      }
      s.nx = s.frame.load_vector.dot(s.frame.r1);
      s.ny = s.frame.load_vector.dot(s.frame.r2);
      s.nz = -s.frame.load_vector.dot(s.frame.r3);
      s.sin_gamma = -s.point.velocity.z() / s.frame.speed;
    }
  }
  singular_ = false;

  // Pass 2: integrands, gradients per sample, then the coefficient-space
  // gradient via the cached basis rows.
  const bool want_grad = grad != nullptr;
  const int power = penalties_.power;
  const double node_scale = duration_ / (kappa_ * n_);  // T/(kappa N)
  if (want_grad) cost_by_coeffs_.setZero();
  double quad_duration_grad = 0.0;  // explicit d/dT of the quadrature

  double sum_effort = 0.0, sum_obstacle = 0.0, sum_speed = 0.0;
  double sum_gamma = 0.0, sum_nx = 0.0, sum_ny = 0.0, sum_nz = 0.0;

  for (int i = 0; i < n_; ++i) {
    const SampleData* seg = &samples_[static_cast<size_t>(i) * (kappa_ + 1)];
    for (int k = 0; k <= kappa_; ++k) {
      gp_[k].setZero();
      gv_[k].setZero();
      ga_[k].setZero();
      gj_[k].setZero();
      weighted_g_[k] = 0.0;
    }

    const auto node_weight = [this](int k) {
      return (k == 0 || k == kappa_) ? 0.5 : 1.0;
    };

    // Effort is always active.
    for (int k = 0; k <= kappa_; ++k) {
      const double w = node_weight(k);
      SampleGradient g;
      const double ge =
          jerkWithGradient(seg[k].point, want_grad ? &g : nullptr);
      sum_effort += w * ge;
      if (want_grad) {
        gj_[k] += config_.weight_effort * g.jerk;
        weighted_g_[k] += config_.weight_effort * ge;
      }
    }

    // Range penalties: skip a family for this segment when every sample sits
    // inside its shrunk band (zero cost and gradient by construction).
    struct Family {
      const PenaltyBand* band;
      double weight;
      double* sum;
      double (*value)(const SampleData&);
    };
    const Family families[4] = {
        {&penalties_.speed, config_.weight_speed, &sum_speed,
         [](const SampleData& s) { return s.frame.speed; }},
        {&penalties_.sin_gamma, config_.weight_gamma, &sum_gamma,
         [](const SampleData& s) { return s.sin_gamma; }},
        {&penalties_.nx, config_.weight_nx, &sum_nx,
         [](const SampleData& s) { return s.nx; }},
        {&penalties_.ny, config_.weight_ny, &sum_ny,
         [](const SampleData& s) { return s.ny; }},
    };
    // nz handled with ny's machinery below; listed separately only because
    // pointers to members of different signs get unwieldy.

    for (int fam = 0; fam < 5; ++fam) {
      const PenaltyBand* band;
      double weight;
      double* sum;
      double (*value)(const SampleData&);
      if (fam < 4) {
        band = families[fam].band;
        weight = families[fam].weight;
        sum = families[fam].sum;
        value = families[fam].value;
      } else {
        band = &penalties_.nz;
        weight = config_.weight_nz;
        sum = &sum_nz;
        value = [](const SampleData& s) { return s.nz; };
      }
      if (config_.filter_inactive) {
        bool active = false;
        for (int k = 0; k <= kappa_; ++k) {
          if (!band->inside(value(seg[k]))) {
            active = true;
            break;
          }
        }
        if (!active) continue;
      }
      for (int k = 0; k <= kappa_; ++k) {
        const double q = value(seg[k]);
        const double gval = band->value(q, power);
        if (gval == 0.0) continue;
        const double w = node_weight(k);
        *sum += w * gval;
        if (!want_grad) continue;
        SampleGradient g;
        switch (fam) {
          case 0:
            speedWithGradient(seg[k].point, seg[k].frame, *band, power, &g);
            break;
          case 1:
            sinGammaWithGradient(seg[k].point, seg[k].frame, *band, power, &g);
            break;
          case 2:
            loadWithGradient(seg[k].point, seg[k].frame, seg[k].nx,
                             LoadAxis::Nx, *band, power, gravity_, &g);
            break;
          case 3:
            loadWithGradient(seg[k].point, seg[k].frame, seg[k].ny,
                             LoadAxis::Ny, *band, power, gravity_, &g);
            break;
          case 4:
            loadWithGradient(seg[k].point, seg[k].frame, seg[k].nz,
                             LoadAxis::Nz, *band, power, gravity_, &g);
            break;
        }
        gv_[k] += weight * g.velocity;
        ga_[k] += weight * g.acceleration;
        weighted_g_[k] += weight * gval;
      }
    }

    // Obstacles: activity radius is the inflated limit plus the largest
    // sampled spacing of this segment, so a clearing verdict cannot be an
    // artifact of the sampling resolution.
    if (!penalties_.obstacles.empty()) {
      double spacing = 0.0;
      for (int k = 0; k < kappa_; ++k) {
        spacing = std::max(spacing, (seg[k + 1].point.position -
                                     seg[k].point.position)
                                        .norm());
      }
      for (const ObstacleField& field : penalties_.obstacles) {
        bool active = !config_.filter_inactive;
        const double rho = field.limit + spacing;
        for (int k = 0; k <= kappa_; ++k) {
          const double dx = seg[k].point.position.x() - field.center.x();
          const double dy = seg[k].point.position.y() - field.center.y();
          dist2_[k] = dx * dx + dy * dy;
          if (dist2_[k] < rho * rho) active = true;
        }
        if (!active) continue;
        const double inv_limit2 = 1.0 / (field.limit * field.limit);
        for (int k = 0; k <= kappa_; ++k) {
          const double phi = 1.0 - dist2_[k] * inv_limit2;
          if (phi <= 0.0) continue;
          const double w = node_weight(k);
          const double gval = hingePower(phi, power);
          sum_obstacle += w * gval;
          if (!want_grad) continue;
          const double dphi = hingePowerDerivative(phi, power);
          const double c = -2.0 * inv_limit2 * dphi * config_.weight_obstacle;
          gp_[k].x() += c * (seg[k].point.position.x() - field.center.x());
          gp_[k].y() += c * (seg[k].point.position.y() - field.center.y());
          weighted_g_[k] += config_.weight_obstacle * gval;
        }
      }
    }

    if (want_grad) {
      auto block = cost_by_coeffs_.block<6, 3>(6 * i, 0);
      for (int k = 0; k <= kappa_; ++k) {
        const double w = node_weight(k);
        const double wt = node_scale * w;
        block += wt * (basis_.value(0, k) * gp_[k].transpose() +
                       s1 * (basis_.value(1, k) * gv_[k].transpose()) +
                       s2 * (basis_.value(2, k) * ga_[k].transpose()) +
                       s3 * (basis_.value(3, k) * gj_[k].transpose()));
        quad_duration_grad +=
            (w / (kappa_ * n_)) *
            (weighted_g_[k] - gv_[k].dot(seg[k].point.velocity) -
             2.0 * ga_[k].dot(seg[k].point.acceleration) -
             3.0 * gj_[k].dot(seg[k].point.jerk));
      }
    }
  }

  breakdown_.effort = node_scale * sum_effort;
  breakdown_.obstacle = node_scale * sum_obstacle;
  breakdown_.speed = node_scale * sum_speed;
  breakdown_.gamma = node_scale * sum_gamma;
  breakdown_.load_nx = node_scale * sum_nx;
  breakdown_.load_ny = node_scale * sum_ny;
  breakdown_.load_nz = node_scale * sum_nz;
  breakdown_.time_cost =
      timeCost(duration_, scenario_.time_cost, config_.penalty_power);
  breakdown_.total =
      breakdown_.time_cost + config_.weight_effort * breakdown_.effort +
      config_.weight_obstacle * breakdown_.obstacle +
      config_.weight_speed * breakdown_.speed +
      config_.weight_gamma * breakdown_.gamma +
      config_.weight_nx * breakdown_.load_nx +
      config_.weight_ny * breakdown_.load_ny +
      config_.weight_nz * breakdown_.load_nz;

  if (!std::isfinite(breakdown_.total)) {
    singular_ = true;
    breakdown_.total = kInf;
    return breakdown_;
  }

  if (grad != nullptr) {
    GradAccumulator acc;
    acc.by_coeffs = cost_by_coeffs_;
    acc.by_duration = quad_duration_grad;
    const double qprime = timeCostDerivative(duration_, scenario_.time_cost,
                                             config_.penalty_power);
    propagate(acc, system_, start_, finish_, duration_, qprime);
    grad->resize(dimension());
    for (int i = 0; i < n_ - 1; ++i) {
      grad->segment<3>(3 * i) = acc.by_waypoints.row(i).transpose();
    }
    if (!fixedDuration()) (*grad)(3 * (n_ - 1)) = acc.by_log_duration;
  }
  return breakdown_;
}

FeasibilityReport ObjectiveEvaluator::lastFeasibility() const {
  FeasibilityReport r;
  const double sg_min = std::sin(scenario_.gamma_min);
  const double sg_max = std::sin(scenario_.gamma_max);
  for (const SampleData& s : samples_) {
    r.speed = std::max({r.speed, s.frame.speed - scenario_.speed_max,
                        scenario_.speed_min - s.frame.speed});
    r.gamma = std::max({r.gamma, s.sin_gamma - sg_max, sg_min - s.sin_gamma});
    r.load_nx =
        std::max({r.load_nx, s.nx - scenario_.nx_max, scenario_.nx_min - s.nx});
    r.load_ny =
        std::max({r.load_ny, s.ny - scenario_.ny_max, scenario_.ny_min - s.ny});
    r.load_nz =
        std::max({r.load_nz, s.nz - scenario_.nz_max, scenario_.nz_min - s.nz});
    for (const Obstacle& o : scenario_.obstacles) {
      const double d = (s.point.position.head<2>() - o.center).norm();
      r.obstacle =
          std::max(r.obstacle, o.radius + scenario_.safe_distance - d);
    }
  }
  return r;
}

FlatTrajectory ObjectiveEvaluator::lastTrajectory() const {
  FlatTrajectory traj;
  traj.segments = n_;
  traj.duration = duration_;
  traj.waypoints = waypoints_;
  traj.coeffs = coeffs_;
  traj.start = start_;
  traj.finish = finish_;
  return traj;
}

}  // namespace dfto
