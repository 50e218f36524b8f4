#pragma once

#include <Eigen/Dense>

#include <functional>

namespace dfto {

enum class LbfgsStatus {
  GradientConverged,  // ||grad|| fell below grad_tolerance
  CallbackStop,       // iteration callback requested the stop
  MaxIterations,
  LineSearchFailed,   // no acceptable step along the current direction
  InvalidStart,       // objective not finite at x0
};

struct LbfgsOptions {
  int memory = 8;
  int max_iterations = 5000;
  // Internal stationarity exit; 0 disables it (a callback then owns the exit).
  double grad_tolerance = 1e-3;
  double armijo = 1e-4;      // sufficient-decrease constant
  double curvature = 0.9;    // weak Wolfe curvature constant
  int max_line_search = 60;  // trial evaluations per step
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;    // accepted steps
  int evaluations = 0;   // objective calls
  LbfgsStatus status = LbfgsStatus::MaxIterations;
};

// Returns the value and fills grad (pre-sized to x.size()); a non-finite
// return marks the point as unusable and the gradient is ignored.
using Objective =
    std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

// Runs after every accepted step; returning true stops with CallbackStop.
using IterationCallback = std::function<bool(
    int iteration, const Eigen::VectorXd& x, double value, double grad_norm)>;

// Limited-memory BFGS with the two-loop recursion, s'y/y'y initial scaling,
// and a bisection line search for the weak Wolfe conditions. Non-finite trial
// values shrink the step, so penalty singularities act as an infinite barrier.
// The objective is guaranteed to have been called last at the accepted point
// of each iteration (callers may cache per-evaluation state keyed on that).
LbfgsResult minimize(const Objective& f, Eigen::VectorXd x0,
                     const LbfgsOptions& options = {},
                     const IterationCallback& callback = {});

}  // namespace dfto
