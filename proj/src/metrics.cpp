#include "wsqaoa/metrics.hpp"

#include <algorithm>
#include <limits>

namespace wsqaoa {

namespace {

constexpr int kMaxEnumeration = 24;

std::uint64_t total_shots(const ShotHistogram& h) {
  std::uint64_t total = 0;
  for (const auto& [z, c] : h) total += c;
  if (total == 0) throw InputError("histogram holds no shots");
  return total;
}

}  // namespace

FeasibleSpectrum brute_force_spectrum(const PortfolioInstance& instance) {
  instance.validate();
  const int n = instance.n_assets();
  if (n > kMaxEnumeration) throw InputError("brute force limited to 24 assets");

  FeasibleSpectrum spec;
  spec.fc_min = std::numeric_limits<double>::infinity();
  spec.fc_max = -std::numeric_limits<double>::infinity();
  const BasisIndex dim = BasisIndex{1} << n;
  for (BasisIndex z = 0; z < dim; ++z) {
    if (popcount(z) != instance.budget) continue;
    ++spec.feasible_count;
    const double c = portfolio_cost(instance, z);
    if (c < spec.fc_min) {
      spec.fc_min = c;
      spec.argmin = z;
      spec.optimal_set.assign(1, z);
    } else if (c == spec.fc_min) {
      spec.optimal_set.push_back(z);
    }
    spec.fc_max = std::max(spec.fc_max, c);
  }
  return spec;
}

QuboMinimum brute_force_minimum(const QuboProblem& problem) {
  if (problem.size() > kMaxEnumeration) throw InputError("brute force limited to 24 variables");
  QuboMinimum best{0, std::numeric_limits<double>::infinity()};
  const BasisIndex dim = BasisIndex{1} << problem.size();
  for (BasisIndex z = 0; z < dim; ++z) {
    const double v = problem.evaluate(z);
    if (v < best.value) best = {z, v};
  }
  return best;
}

double approx_ratio(BasisIndex bits, const PortfolioInstance& instance,
                    const FeasibleSpectrum& spectrum) {
  if (popcount(bits) != instance.budget) return 0.0;
  if (spectrum.degenerate()) return 1.0;
  const double r = (portfolio_cost(instance, bits) - spectrum.fc_max) /
                   (spectrum.fc_min - spectrum.fc_max);
  return std::clamp(r, 0.0, 1.0);
}

double approx_ratio(std::span<const std::uint8_t> bits, const PortfolioInstance& instance,
                    const FeasibleSpectrum& spectrum) {
  if (bits.size() != static_cast<std::size_t>(instance.n_assets()))
    throw InputError("bitstring length does not match instance");
  return approx_ratio(to_index(bits), instance, spectrum);
}

double mean_approx_ratio(std::span<const double> probabilities, const PortfolioInstance& instance,
                         const FeasibleSpectrum& spectrum) {
  if (probabilities.size() != (std::size_t{1} << instance.n_assets()))
    throw InputError("distribution length must be 2^N");
  double r = 0.0;
  for (std::size_t z = 0; z < probabilities.size(); ++z) {
    if (probabilities[z] == 0.0) continue;
    r += probabilities[z] * approx_ratio(static_cast<BasisIndex>(z), instance, spectrum);
  }
  return r;
}

double mean_approx_ratio(const ShotHistogram& histogram, const PortfolioInstance& instance,
                         const FeasibleSpectrum& spectrum) {
  const double total = static_cast<double>(total_shots(histogram));
  double r = 0.0;
  for (const auto& [z, count] : histogram)
    r += static_cast<double>(count) * approx_ratio(z, instance, spectrum);
  return r / total;
}

double ground_state_probability(std::span<const double> probabilities,
                                const FeasibleSpectrum& spectrum) {
  double p = 0.0;
  for (BasisIndex z : spectrum.optimal_set) {
    if (z >= probabilities.size()) throw InputError("distribution shorter than spectrum index");
    p += probabilities[z];
  }
  return p;
}

double ground_state_probability(const ShotHistogram& histogram, const FeasibleSpectrum& spectrum) {
  const double total = static_cast<double>(total_shots(histogram));
  std::uint64_t hits = 0;
  for (BasisIndex z : spectrum.optimal_set) {
    auto it = histogram.find(z);
    if (it != histogram.end()) hits += it->second;
  }
  return static_cast<double>(hits) / total;
}

}  // namespace wsqaoa
