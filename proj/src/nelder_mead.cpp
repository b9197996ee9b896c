#include "wsqaoa/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wsqaoa/bits.hpp"

namespace wsqaoa {

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> start, const NelderMeadOptions& options) {
  if (options.max_evals < 1) throw InputError("nelder_mead needs max_evals >= 1");
  const std::size_t dim = start.size();

  NelderMeadResult result;
  int evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    return f(x);
  };

  if (dim == 0) {
    result.value = eval(start);
    result.evaluations = evals;
    result.converged = true;
    return result;
  }

  std::vector<std::vector<double>> pts(dim + 1, start);
  std::vector<double> vals(dim + 1);
  for (std::size_t i = 0; i < dim; ++i) pts[i + 1][i] += options.initial_step;
  for (std::size_t i = 0; i <= dim && evals < options.max_evals; ++i) vals[i] = eval(pts[i]);
  // Vertices not evaluated within budget never win.
  for (std::size_t i = static_cast<std::size_t>(evals); i <= dim; ++i)
    vals[i] = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order(dim + 1);
  std::vector<double> centroid(dim), trial(dim), trial2(dim);
  auto point_along = [&](double t, std::vector<double>& out) {
    // centroid + t * (centroid - worst)
    const auto& worst = pts[order[dim]];
    for (std::size_t j = 0; j < dim; ++j) out[j] = centroid[j] + t * (centroid[j] - worst[j]);
  };

  while (true) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const double best = vals[order[0]];
    const double worst = vals[order[dim]];
    if (std::abs(worst - best) < options.tol) {
      result.converged = true;
      break;
    }
    if (evals >= options.max_evals) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t k = 0; k < dim; ++k)
      for (std::size_t j = 0; j < dim; ++j) centroid[j] += pts[order[k]][j];
    for (auto& c : centroid) c /= static_cast<double>(dim);

    const std::size_t w = order[dim];
    point_along(1.0, trial);
    const double fr = eval(trial);
    if (fr < best) {
      if (evals < options.max_evals) {
        point_along(2.0, trial2);
        const double fe = eval(trial2);
        if (fe < fr) {
          pts[w] = trial2;
          vals[w] = fe;
          continue;
        }
      }
      pts[w] = trial;
      vals[w] = fr;
      continue;
    }
    if (fr < vals[order[dim - 1]]) {
      pts[w] = trial;
      vals[w] = fr;
      continue;
    }
    if (evals >= options.max_evals) break;
    // contraction: outside if the reflection beat the worst, inside otherwise
    const bool outside = fr < worst;
    point_along(outside ? 0.5 : -0.5, trial2);
    const double fc = eval(trial2);
    if (fc < (outside ? fr : worst)) {
      pts[w] = trial2;
      vals[w] = fc;
      continue;
    }
    // shrink toward the best vertex, only when the whole shrink fits the budget
    if (evals + static_cast<int>(dim) > options.max_evals) break;
    const auto& xb = pts[order[0]];
    for (std::size_t k = 1; k <= dim; ++k) {
      auto& p = pts[order[k]];
      for (std::size_t j = 0; j < dim; ++j) p[j] = xb[j] + 0.5 * (p[j] - xb[j]);
      vals[order[k]] = eval(p);
    }
  }

  const auto best_it = std::min_element(vals.begin(), vals.end());
  result.x = pts[static_cast<std::size_t>(best_it - vals.begin())];
  result.value = *best_it;
  result.evaluations = evals;
  return result;
}

}  // namespace wsqaoa
