#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wsqaoa/portfolio.hpp"
#include "wsqaoa/relaxation.hpp"

namespace wsqaoa {

/// Bumped whenever generate_instance changes its output for a given seed.
inline constexpr const char* kGeneratorVersion = "factor-gauss-v1";

struct GeneratorOptions {
  int n_assets = 10;
  int budget = 5;
  double q = 0.5;
  int t_samples = 5000;               // synthetic trading days
  std::optional<double> penalty;      // choose_penalty when unset
};

/// Synthetic instance from daily returns of a two-factor Gaussian model with
/// per-asset drift, loadings and idiosyncratic noise. mu is the annualized
/// sample mean, sigma the annualized sample covariance (PSD by construction).
PortfolioInstance generate_instance(std::uint64_t seed, const GeneratorOptions& options = {});

/// Convenience overload matching (n, seed, t_samples).
PortfolioInstance generate_instance(int n, std::uint64_t seed, int t_samples);

/// Ten DAX assets: returns and covariances as published, q = 0.5, B = 5,
/// penalty from choose_penalty.
PortfolioInstance appendix_instance();

/// max_i |x_i - opt_i|.
double epsilon_measure(std::span<const double> x_star, std::span<const std::uint8_t> x_opt);
/// sqrt(sum_i (x_i - opt_i)^2 / N).
double sigma_measure(std::span<const double> x_star, std::span<const std::uint8_t> x_opt);

struct InstanceAnnotation {
  Eigen::VectorXd x_star;
  Bitstring x_opt;  // brute-force minimizer of the penalized QUBO
  double epsilon = 0.0;
  double sigma = 0.0;
  bool relaxation_converged = false;
};

/// Relaxation plus brute force. Throws when x_opt violates the budget, which
/// signals a penalty too small to separate feasible from infeasible strings.
InstanceAnnotation annotate_instance(const PortfolioInstance& instance,
                                     const BoxQpOptions& relax_options = {});

/// Relaxed solution with convexification applied when needed.
RelaxedSolution relax_instance(const PortfolioInstance& instance, const BoxQpOptions& options = {});

struct InstanceEnsemble {
  std::vector<PortfolioInstance> instances;
  std::vector<std::uint64_t> seeds;
  std::vector<std::optional<InstanceAnnotation>> annotations;
  std::string generator_version = kGeneratorVersion;
  GeneratorOptions options;

  std::size_t size() const { return instances.size(); }
  bool annotated() const;
};

/// Instance i uses seed derive_seed(base_seed, i).
InstanceEnsemble generate_ensemble(std::size_t count, std::uint64_t base_seed,
                                   const GeneratorOptions& options = {});

/// Fills every annotation; work is split over `threads` workers, results do
/// not depend on the thread count.
void annotate_ensemble(InstanceEnsemble& ensemble, int threads = 1,
                       const BoxQpOptions& relax_options = {});

enum class DeviationMeasure { epsilon, sigma };

struct HotColdSplit {
  std::vector<std::size_t> hot;   // k smallest deviations, ascending
  std::vector<std::size_t> cold;  // k largest deviations, descending
};

/// Ties are broken by instance seed ascending. Throws on missing
/// annotations or k > size / 2.
HotColdSplit classify_hot_cold(const InstanceEnsemble& ensemble, DeviationMeasure measure,
                               std::size_t k);

}  // namespace wsqaoa
