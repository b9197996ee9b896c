#pragma once

#include <span>
#include <vector>

#include "wsqaoa/portfolio.hpp"
#include "wsqaoa/statevector.hpp"

namespace wsqaoa {

/// Extremes of the unpenalized cost over the feasible slice sum(x) = B.
struct FeasibleSpectrum {
  double fc_min = 0.0;
  double fc_max = 0.0;
  BasisIndex argmin = 0;  // lowest index among the minimizers
  std::uint64_t feasible_count = 0;
  /// Every feasible index attaining fc_min (size > 1 only with exact ties).
  std::vector<BasisIndex> optimal_set;

  bool degenerate() const { return fc_min == fc_max; }
  bool has_ties() const { return optimal_set.size() > 1; }
};

FeasibleSpectrum brute_force_spectrum(const PortfolioInstance& instance);

/// Lowest penalized QUBO value over all 2^N strings (lowest index on ties).
struct QuboMinimum {
  BasisIndex argmin = 0;
  double value = 0.0;
};
QuboMinimum brute_force_minimum(const QuboProblem& problem);

/// (F_C(x) - fc_max) / (fc_min - fc_max) for feasible x, 0 otherwise.
/// A degenerate spectrum scores every feasible x as 1.
double approx_ratio(BasisIndex bits, const PortfolioInstance& instance,
                    const FeasibleSpectrum& spectrum);
double approx_ratio(std::span<const std::uint8_t> bits, const PortfolioInstance& instance,
                    const FeasibleSpectrum& spectrum);

/// Expectation of approx_ratio under a probability vector over all 2^N states.
double mean_approx_ratio(std::span<const double> probabilities, const PortfolioInstance& instance,
                         const FeasibleSpectrum& spectrum);
double mean_approx_ratio(const ShotHistogram& histogram, const PortfolioInstance& instance,
                         const FeasibleSpectrum& spectrum);

/// Mass on the optimal set.
double ground_state_probability(std::span<const double> probabilities,
                                const FeasibleSpectrum& spectrum);
double ground_state_probability(const ShotHistogram& histogram, const FeasibleSpectrum& spectrum);

}  // namespace wsqaoa
