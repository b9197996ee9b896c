#pragma once

#include <functional>
#include <vector>

namespace wsqaoa {

struct NelderMeadOptions {
  int max_evals = 2000;
  /// Stop when max |f(vertex) - f(best)| falls below this.
  double tol = 1e-6;
  /// Edge length of the axis-aligned starting simplex.
  double initial_step = 0.1;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Downhill simplex with the usual coefficients (reflect 1, expand 2,
/// contract 1/2, shrink 1/2). The returned value never exceeds f(start).
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> start, const NelderMeadOptions& options);

}  // namespace wsqaoa
