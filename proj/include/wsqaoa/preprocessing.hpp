#pragma once

#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "wsqaoa/metrics.hpp"
#include "wsqaoa/portfolio.hpp"

namespace wsqaoa {

/// Relaxed values at or below delta0 round to 0, at or above 1 - delta1 to 1.
struct RoundingBounds {
  double delta0 = 0.5;
  double delta1 = 0.5;

  /// Throws unless both lie in [0, 1] and delta0 + delta1 <= 1.
  void validate() const;
};

/// Original variable index -> fixed value.
using FixedAssignment = std::map<int, std::uint8_t>;

struct RoundingResult {
  FixedAssignment fixed;
  std::vector<int> free;  // ascending
};

RoundingResult round_relaxed(std::span<const double> x_star, const RoundingBounds& bounds);
RoundingResult round_relaxed(const Eigen::VectorXd& x_star, const RoundingBounds& bounds);

/// QUBO over the free variables after substituting the fixed ones.
/// qubo.offset already contains offset_accumulated, so qubo.evaluate(y)
/// equals the original problem evaluated at lift(y).
struct ReducedProblem {
  QuboProblem qubo;
  FixedAssignment fixed;
  std::vector<int> free_index_map;  // reduced variable k -> original index
  double offset_accumulated = 0.0;  // constant added by the substitution
  int n_original = 0;

  int n_free() const { return static_cast<int>(free_index_map.size()); }
};

ReducedProblem eliminate(const QuboProblem& problem, const FixedAssignment& fixed);

Bitstring lift(const ReducedProblem& reduced, std::span<const std::uint8_t> y);
BasisIndex lift(const ReducedProblem& reduced, BasisIndex y);

/// Pushes a distribution over the 2^k reduced states onto the 2^N original states.
std::vector<double> lift_distribution(const ReducedProblem& reduced,
                                      std::span<const double> probabilities);
ShotHistogram lift_histogram(const ReducedProblem& reduced, const ShotHistogram& histogram);

struct BaselineResult {
  Bitstring bits;
  double r = 0.0;
  double P = 0.0;
};

/// Rounds every variable at 0.5 (x = 0.5 goes to 0, the zero test runs first)
/// and scores the result on the full instance. P is 1 only for an optimal string.
BaselineResult classical_baseline(const PortfolioInstance& instance, std::span<const double> x_star);
BaselineResult classical_baseline(const PortfolioInstance& instance, std::span<const double> x_star,
                                  const FeasibleSpectrum& spectrum);

}  // namespace wsqaoa
