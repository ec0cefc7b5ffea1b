#pragma once

#include <functional>

#include "klish/types.hpp"

namespace klish {

struct LbfgsOptions {
  int history = 10;
  int max_iter = 1000;
  /// Converged once an accepted step changes no coordinate by this much.
  double step_tol = 1e-4;
  double c1 = 1e-4;  // sufficient decrease
  double c2 = 0.9;   // curvature
  double initial_step = 1.0;
  int max_line_search = 25;
};

struct LbfgsResult {
  Vector x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  double last_step = 0.0;  // L-inf norm of the last accepted step
  bool converged = false;
};

/// Returns f(x) and writes the gradient into `grad` (already sized).
using Objective = std::function<double(const Vector& x, Vector& grad)>;

/// Limited-memory BFGS with a strong-Wolfe line search (cubic interpolation
/// with bracketing and zoom). Throws NumericError if f is non-finite at x0 or
/// the line search cannot find a finite value.
LbfgsResult minimize_lbfgs(const Objective& f, Vector x0, const LbfgsOptions& opts);

}  // namespace klish
