#include "wsqaoa/preprocessing.hpp"

#include <cmath>
#include <string>

namespace wsqaoa {

void RoundingBounds::validate() const {
  if (!(delta0 >= 0.0 && delta0 <= 1.0) || !(delta1 >= 0.0 && delta1 <= 1.0))
    throw InputError("rounding bounds must lie in [0, 1]");
  if (delta0 + delta1 > 1.0) throw InputError("rounding bounds must satisfy delta0 + delta1 <= 1");
}

RoundingResult round_relaxed(std::span<const double> x_star, const RoundingBounds& bounds) {
  bounds.validate();
  RoundingResult out;
  for (std::size_t i = 0; i < x_star.size(); ++i) {
    const double x = x_star[i];
    if (!(x >= 0.0 && x <= 1.0)) throw InputError("relaxed value outside [0, 1]");
    const int idx = static_cast<int>(i);
    // the zero test runs first, as in the rounding scheme
    if (x <= bounds.delta0)
      out.fixed[idx] = 0;
    else if (x >= 1.0 - bounds.delta1)
      out.fixed[idx] = 1;
    else
      out.free.push_back(idx);
  }
  return out;
}

RoundingResult round_relaxed(const Eigen::VectorXd& x_star, const RoundingBounds& bounds) {
  return round_relaxed(std::span<const double>(x_star.data(), static_cast<std::size_t>(x_star.size())),
                       bounds);
}

ReducedProblem eliminate(const QuboProblem& problem, const FixedAssignment& fixed) {
  problem.validate();
  const int n = problem.size();
  ReducedProblem out;
  out.n_original = n;
  out.fixed = fixed;
  for (const auto& [i, v] : fixed) {
    if (i < 0 || i >= n) throw InputError("fixed index " + std::to_string(i) + " out of range");
    if (v > 1) throw InputError("fixed values must be 0 or 1");
  }
  for (int i = 0; i < n; ++i)
    if (!fixed.contains(i)) out.free_index_map.push_back(i);

  const int k = out.n_free();
  double constant = 0.0;
  for (const auto& [i, vi] : fixed) {
    if (!vi) continue;
    constant += problem.lin(i);
    for (const auto& [j, vj] : fixed)
      if (vj) constant += problem.quad(i, j);
  }

  QuboProblem& q = out.qubo;
  q.quad.resize(k, k);
  q.lin.resize(k);
  for (int a = 0; a < k; ++a) {
    const int i = out.free_index_map[a];
    double l = problem.lin(i);
    for (const auto& [j, vj] : fixed)
      if (vj) l += problem.quad(i, j) + problem.quad(j, i);
    q.lin(a) = l;
    for (int b = 0; b < k; ++b) q.quad(a, b) = problem.quad(i, out.free_index_map[b]);
  }
  out.offset_accumulated = constant;
  q.offset = problem.offset + constant;
  return out;
}

Bitstring lift(const ReducedProblem& reduced, std::span<const std::uint8_t> y) {
  if (y.size() != static_cast<std::size_t>(reduced.n_free()))
    throw InputError("reduced bitstring length mismatch");
  Bitstring bits(static_cast<std::size_t>(reduced.n_original), 0);
  for (const auto& [i, v] : reduced.fixed) bits[i] = v;
  for (int a = 0; a < reduced.n_free(); ++a) bits[reduced.free_index_map[a]] = y[a];
  return bits;
}

BasisIndex lift(const ReducedProblem& reduced, BasisIndex y) {
  BasisIndex z = 0;
  for (const auto& [i, v] : reduced.fixed)
    if (v) z |= BasisIndex{1} << i;
  for (int a = 0; a < reduced.n_free(); ++a)
    if ((y >> a) & 1U) z |= BasisIndex{1} << reduced.free_index_map[a];
  return z;
}

std::vector<double> lift_distribution(const ReducedProblem& reduced,
                                      std::span<const double> probabilities) {
  if (probabilities.size() != (std::size_t{1} << reduced.n_free()))
    throw InputError("reduced distribution length must be 2^k");
  std::vector<double> out(std::size_t{1} << reduced.n_original, 0.0);
  for (std::size_t y = 0; y < probabilities.size(); ++y)
    out[lift(reduced, static_cast<BasisIndex>(y))] += probabilities[y];
  return out;
}

ShotHistogram lift_histogram(const ReducedProblem& reduced, const ShotHistogram& histogram) {
  ShotHistogram out;
  for (const auto& [y, count] : histogram) out[lift(reduced, y)] += count;
  return out;
}

BaselineResult classical_baseline(const PortfolioInstance& instance, std::span<const double> x_star) {
  return classical_baseline(instance, x_star, brute_force_spectrum(instance));
}

BaselineResult classical_baseline(const PortfolioInstance& instance, std::span<const double> x_star,
                                  const FeasibleSpectrum& spectrum) {
  if (x_star.size() != static_cast<std::size_t>(instance.n_assets()))
    throw InputError("relaxed solution length mismatch");
  const auto rounding = round_relaxed(x_star, RoundingBounds{0.5, 0.5});
  BaselineResult out;
  out.bits.assign(x_star.size(), 0);
  for (const auto& [i, v] : rounding.fixed) out.bits[i] = v;
  const BasisIndex z = to_index(out.bits);
  out.r = approx_ratio(z, instance, spectrum);
  bool optimal = false;
  for (BasisIndex opt : spectrum.optimal_set) optimal = optimal || opt == z;
  out.P = optimal ? 1.0 : 0.0;
  return out;
}

}  // namespace wsqaoa
