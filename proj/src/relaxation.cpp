#include "wsqaoa/relaxation.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <vector>

namespace wsqaoa {

namespace {

constexpr double kPsdTol = 1e-10;

constexpr int kPolishInterval = 100;

Eigen::VectorXd clamp_unit(const Eigen::VectorXd& x) { return x.cwiseMax(0.0).cwiseMin(1.0); }

// Exact minimizer of the objective on the face that keeps the saturated
// coordinates of x fixed. Returns false when it leaves the box or the face
// system is singular.
bool face_minimizer(const QuboProblem& problem, const Eigen::VectorXd& x, Eigen::VectorXd& out) {
  std::vector<int> free;
  for (int i = 0; i < x.size(); ++i)
    if (x(i) > 0.0 && x(i) < 1.0) free.push_back(i);
  if (free.empty()) return false;

  const Eigen::MatrixXd h = problem.quad + problem.quad.transpose();
  const int k = static_cast<int>(free.size());
  Eigen::MatrixXd h_ff(k, k);
  Eigen::VectorXd rhs(k);
  for (int a = 0; a < k; ++a) {
    double r = -problem.lin(free[a]);
    for (int j = 0; j < x.size(); ++j)
      if (!(x(j) > 0.0 && x(j) < 1.0)) r -= h(free[a], j) * x(j);
    rhs(a) = r;
    for (int b = 0; b < k; ++b) h_ff(a, b) = h(free[a], free[b]);
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(h_ff);
  if (ldlt.info() != Eigen::Success) return false;
  const Eigen::VectorXd y = ldlt.solve(rhs);
  if (!y.allFinite() || (h_ff * y - rhs).norm() > 1e-10 * (1.0 + rhs.norm())) return false;
  out = x;
  for (int a = 0; a < k; ++a) {
    if (y(a) < 0.0 || y(a) > 1.0) return false;
    out(free[a]) = y(a);
  }
  return true;
}

}  // namespace

QuboProblem convexify(const QuboProblem& problem) {
  problem.validate();
  const double lambda_min = min_eigenvalue(problem.quad);
  if (lambda_min >= 0.0) return problem;
  const double c = -lambda_min + 1e-9;
  QuboProblem out = problem;
  out.quad.diagonal().array() += c;
  out.lin.array() -= c;
  return out;
}

double projected_gradient_norm(const QuboProblem& problem, const Eigen::VectorXd& x) {
  return (x - clamp_unit(x - problem.gradient(x))).norm();
}

RelaxedSolution solve_box_qp(const QuboProblem& problem, const BoxQpOptions& options) {
  problem.validate();
  if (min_eigenvalue(problem.quad) < -kPsdTol)
    throw InputError("solve_box_qp needs a positive semidefinite quad; convexify the problem first");
  if (options.max_iter < 0 || !(options.tol > 0.0)) throw InputError("invalid box QP options");

  const int n = problem.size();
  double lipschitz = 2.0 * problem.quad.cwiseAbs().rowwise().sum().maxCoeff();
  if (lipschitz <= 0.0) lipschitz = 1.0;
  const double step = 1.0 / lipschitz;

  RelaxedSolution sol;
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 0.5);
  [[maybe_unused]] double value = problem.evaluate(x);
  double best_pg = std::numeric_limits<double>::infinity();
  int stalled = 0;

  int it = 0;
  for (; it < options.max_iter; ++it) {
    const Eigen::VectorXd g = problem.gradient(x);
    const double pg = (x - clamp_unit(x - g)).norm();
    if (pg <= options.tol) {
      sol.converged = true;
      break;
    }
    if (pg < best_pg * (1.0 - 1e-12)) {
      best_pg = pg;
      stalled = 0;
    } else {
      ++stalled;
    }
    x = clamp_unit(x - step * g);
    double next = problem.evaluate(x);
    assert(next <= value + 1e-12 * (1.0 + std::abs(value)));
    // Jump to the face minimum once the active set has settled.
    Eigen::VectorXd polished;
    if ((it + 1) % kPolishInterval == 0 && face_minimizer(problem, x, polished)) {
      const double pv = problem.evaluate(polished);
      if (pv <= next) {
        x = polished;
        next = pv;
      }
    }
    value = next;
  }

  sol.iterations = it;
  sol.x_star = x;
  sol.objective = problem.evaluate(x);
  sol.grad_norm_final = projected_gradient_norm(problem, x);
  if (!sol.converged && sol.grad_norm_final <= options.tol) sol.converged = true;
  sol.non_unique = !sol.converged && stalled > 1000;
  return sol;
}

}  // namespace wsqaoa
