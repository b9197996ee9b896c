#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wsqaoa/bits.hpp"

namespace wsqaoa {

/// Mean-variance portfolio selection with a cardinality budget.
///
/// Cost of a selection x (x_i = 1 when asset i is held):
///   F_C(x) = q * x^T sigma x - (1 - q) * mu^T x
/// and the penalized cost adds penalty * (budget - sum_i x_i)^2.
struct PortfolioInstance {
  std::vector<std::string> labels;  // optional, empty or one per asset
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
  double q = 0.5;
  int budget = 0;
  double penalty = 0.0;

  int n_assets() const { return static_cast<int>(mu.size()); }

  /// Throws InputError when sizes, symmetry, PSD-ness, q, budget or penalty
  /// are out of range.
  void validate() const;
};

/// F(x) = x^T quad x + lin^T x + offset over binary (or box) variables.
/// The linear term is kept apart from the diagonal; the continuous
/// relaxation depends on the split.
struct QuboProblem {
  Eigen::MatrixXd quad;
  Eigen::VectorXd lin;
  double offset = 0.0;

  int size() const { return static_cast<int>(lin.size()); }

  void validate() const;

  double evaluate(std::span<const std::uint8_t> bits) const;
  double evaluate(BasisIndex index) const;
  double evaluate(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
};

double portfolio_cost(const PortfolioInstance& instance, std::span<const std::uint8_t> bits);
double portfolio_cost(const PortfolioInstance& instance, BasisIndex index);

double penalized_cost(const PortfolioInstance& instance, std::span<const std::uint8_t> bits);
double penalized_cost(const PortfolioInstance& instance, BasisIndex index);

QuboProblem to_qubo(const PortfolioInstance& instance);

/// Penalty weight separating every infeasible selection from every feasible
/// one: q * sum|sigma_ij| + (1 - q) * sum|mu_i| + 1e-3. The penalty field of
/// the instance is ignored.
double choose_penalty(const PortfolioInstance& instance);

/// Full table of QUBO values, entry z = evaluate(z). Size 2^N.
std::vector<double> cost_table(const QuboProblem& problem);

/// Smallest eigenvalue of the symmetrized matrix.
double min_eigenvalue(const Eigen::MatrixXd& m);

}  // namespace wsqaoa
