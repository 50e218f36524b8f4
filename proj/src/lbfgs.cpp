#include "dfto/lbfgs.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace dfto {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

LbfgsResult minimize(const Objective& f, Eigen::VectorXd x0,
                     const LbfgsOptions& options,
                     const IterationCallback& callback) {
  const int dim = static_cast<int>(x0.size());
  LbfgsResult result;
  result.x = std::move(x0);

  Eigen::VectorXd grad(dim);
  result.value = f(result.x, grad);
  result.evaluations = 1;
  if (!std::isfinite(result.value) || !grad.allFinite()) {
    result.status = LbfgsStatus::InvalidStart;
    return result;
  }
  result.grad_norm = grad.norm();
  if (dim == 0) {
    result.status = LbfgsStatus::GradientConverged;
    return result;
  }

  const int m = std::max(1, options.memory);
  std::vector<Eigen::VectorXd> s_hist(m), y_hist(m);
  std::vector<double> rho(m, 0.0), alpha(m, 0.0);
  int stored = 0;  // pairs held
  int head = 0;    // slot of the next insertion

  Eigen::VectorXd direction(dim), x_trial(dim), grad_trial(dim);

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    if (options.grad_tolerance > 0.0 &&
        result.grad_norm <= options.grad_tolerance) {
      result.status = LbfgsStatus::GradientConverged;
      return result;
    }

    // Two-loop recursion, newest pair first.
    direction = -grad;
    for (int k = 0; k < stored; ++k) {
      const int idx = (head - 1 - k + 2 * m) % m;
      alpha[idx] = rho[idx] * s_hist[idx].dot(direction);
      direction -= alpha[idx] * y_hist[idx];
    }
    if (stored > 0) {
      const int newest = (head - 1 + m) % m;
      direction *= s_hist[newest].dot(y_hist[newest]) /
                   y_hist[newest].squaredNorm();
    }
    for (int k = stored - 1; k >= 0; --k) {
      const int idx = (head - 1 - k + 2 * m) % m;
      const double beta = rho[idx] * y_hist[idx].dot(direction);
      direction += (alpha[idx] - beta) * s_hist[idx];
    }

    double dg = direction.dot(grad);
    if (!(dg < 0.0)) {
      // Curvature memory turned unusable; restart from steepest descent.
      stored = 0;
      head = 0;
      direction = -grad;
      dg = -result.grad_norm * result.grad_norm;
    }

    // Interpolated bisection for the weak Wolfe conditions. A point that
    // satisfies Armijo but not curvature is kept as a fallback; the curvature
    // test then only improves on it, it cannot sink the iteration.
    double step = (iter == 1) ? std::min(1.0, 1.0 / result.grad_norm) : 1.0;
    double lo = 0.0;
    double hi = kInf;
    bool accepted = false;
    bool have_fallback = false;
    double f_fallback = 0.0;
    Eigen::VectorXd x_fallback, grad_fallback;
    double f_trial = 0.0;
    for (int ls = 0; ls < options.max_line_search; ++ls) {
      x_trial = result.x + step * direction;
      f_trial = f(x_trial, grad_trial);
      ++result.evaluations;
      const bool usable = std::isfinite(f_trial) && grad_trial.allFinite();
      if (!usable || f_trial > result.value + options.armijo * step * dg) {
        hi = step;
        // Minimizer of the quadratic through (0, f(0), dg) and (hi, f(hi)),
        // safeguarded into the bracket interior.
        double next = 0.5 * (lo + hi);
        if (usable) {
          const double denom = f_trial - result.value - dg * step;
          if (denom > 0.0) {
            const double q = -0.5 * dg * step * step / denom;
            if (q > lo + 0.1 * (hi - lo) && q < hi - 0.1 * (hi - lo)) next = q;
          }
        }
        step = next;
      } else if (grad_trial.dot(direction) < options.curvature * dg) {
        lo = step;
        have_fallback = true;
        f_fallback = f_trial;
        x_fallback = x_trial;
        grad_fallback = grad_trial;
        step = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * step;
      } else {
        accepted = true;
        break;
      }
      if (!(step > 0.0) || !std::isfinite(step)) break;
    }
    if (!accepted) {
      // Budget exhausted. A fallback step that still makes a decrease above
      // rounding noise keeps the iteration alive; anything else is a stall.
      const double floor = 1e-15 * (std::abs(result.value) + 1.0);
      if (have_fallback && result.value - f_fallback > floor) {
        x_trial = std::move(x_fallback);
        f_trial = f_fallback;
        grad_trial = std::move(grad_fallback);
      } else {
        result.status = LbfgsStatus::LineSearchFailed;
        return result;
      }
    }

    s_hist[head] = x_trial - result.x;
    y_hist[head] = grad_trial - grad;
    const double sy = s_hist[head].dot(y_hist[head]);
    if (sy > 1e-12 * s_hist[head].norm() * y_hist[head].norm()) {
      rho[head] = 1.0 / sy;
      head = (head + 1) % m;
      stored = std::min(stored + 1, m);
    }
    // A pair with non-positive curvature is dropped; the slot is reused.

    result.x = x_trial;
    result.value = f_trial;
    grad = grad_trial;
    result.grad_norm = grad.norm();
    result.iterations = iter;

    if (callback && callback(iter, result.x, result.value, result.grad_norm)) {
      result.status = LbfgsStatus::CallbackStop;
      return result;
    }
  }
  result.status = LbfgsStatus::MaxIterations;
  return result;
}

}  // namespace dfto
