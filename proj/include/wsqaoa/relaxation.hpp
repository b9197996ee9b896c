#pragma once

#include <Eigen/Dense>

#include "wsqaoa/portfolio.hpp"

namespace wsqaoa {

struct RelaxedSolution {
  Eigen::VectorXd x_star;  // in [0, 1]^N
  double objective = 0.0;  // F(x_star), offset included
  int iterations = 0;
  bool converged = false;
  double grad_norm_final = 0.0;
  /// Set when progress stalled on a flat face before reaching the tolerance;
  /// the minimizer is then not unique.
  bool non_unique = false;
};

struct BoxQpOptions {
  double tol = 1e-9;
  int max_iter = 100000;
};

/// Shifts the diagonal by c and the linear term by -c (c = -lambda_min + 1e-9)
/// when quad is indefinite. Values at binary points are unchanged since
/// x^2 = x there. PSD inputs come back untouched.
QuboProblem convexify(const QuboProblem& problem);

/// Minimizes x^T quad x + lin^T x + offset over the unit box by projected
/// gradient descent from the box center with step 1/L,
/// L = 2 * max absolute row sum of quad. Every 100 steps the iterate may jump
/// to the exact minimizer on its current face (the saturated coordinates
/// held fixed) when that point stays in the box and lowers the objective.
///
/// Throws InputError when quad is not PSD (call convexify first).
RelaxedSolution solve_box_qp(const QuboProblem& problem, const BoxQpOptions& options = {});

/// Norm of the projected gradient x - clamp(x - g): zero exactly at box-KKT points.
double projected_gradient_norm(const QuboProblem& problem, const Eigen::VectorXd& x);

}  // namespace wsqaoa
