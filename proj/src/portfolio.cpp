#include "wsqaoa/portfolio.hpp"

#include <cmath>
#include <string>

namespace wsqaoa {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kPsdTol = 1e-10;
constexpr int kMaxTableQubits = 24;

bool is_symmetric(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() != m.cols()) return false;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.cols(); ++j)
      if (std::abs(m(i, j) - m(j, i)) > tol) return false;
  return true;
}

void check_length(const PortfolioInstance& instance, std::size_t len) {
  if (len != static_cast<std::size_t>(instance.n_assets()))
    throw InputError("bitstring length " + std::to_string(len) + " does not match " +
                     std::to_string(instance.n_assets()) + " assets");
}

}  // namespace

double min_eigenvalue(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

void PortfolioInstance::validate() const {
  const int n = n_assets();
  if (n < 1) throw InputError("portfolio needs at least one asset");
  if (sigma.rows() != n || sigma.cols() != n) throw InputError("sigma must be N x N");
  if (!labels.empty() && static_cast<int>(labels.size()) != n)
    throw InputError("labels must be empty or one per asset");
  if (!is_symmetric(sigma, kSymmetryTol)) throw InputError("sigma is not symmetric");
  if (min_eigenvalue(sigma) < -kPsdTol) throw InputError("sigma is not positive semidefinite");
  if (!(q >= 0.0 && q <= 1.0)) throw InputError("q must lie in [0, 1]");
  if (budget <= 0 || budget >= n) throw InputError("budget must satisfy 0 < B < N");
  if (!(penalty >= 0.0)) throw InputError("penalty must be nonnegative");
}

void QuboProblem::validate() const {
  if (quad.rows() != size() || quad.cols() != size()) throw InputError("quad must be N x N");
  if (!is_symmetric(quad, kSymmetryTol)) throw InputError("quad is not symmetric");
}

double QuboProblem::evaluate(std::span<const std::uint8_t> bits) const {
  if (bits.size() != static_cast<std::size_t>(size()))
    throw InputError("bitstring length does not match QUBO size");
  double value = offset;
  for (int i = 0; i < size(); ++i) {
    if (!bits[i]) continue;
    value += lin(i);
    for (int j = 0; j < size(); ++j)
      if (bits[j]) value += quad(i, j);
  }
  return value;
}

double QuboProblem::evaluate(BasisIndex index) const {
  double value = offset;
  for (int i = 0; i < size(); ++i) {
    if (!((index >> i) & 1U)) continue;
    value += lin(i);
    for (int j = 0; j < size(); ++j)
      if ((index >> j) & 1U) value += quad(i, j);
  }
  return value;
}

double QuboProblem::evaluate(const Eigen::VectorXd& x) const {
  return x.dot(quad * x) + lin.dot(x) + offset;
}

Eigen::VectorXd QuboProblem::gradient(const Eigen::VectorXd& x) const {
  return (quad + quad.transpose()) * x + lin;
}

double portfolio_cost(const PortfolioInstance& instance, std::span<const std::uint8_t> bits) {
  check_length(instance, bits.size());
  return portfolio_cost(instance, to_index(bits));
}

double portfolio_cost(const PortfolioInstance& instance, BasisIndex index) {
  const int n = instance.n_assets();
  double risk = 0.0;
  double ret = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!((index >> i) & 1U)) continue;
    ret += instance.mu(i);
    for (int j = 0; j < n; ++j)
      if ((index >> j) & 1U) risk += instance.sigma(i, j);
  }
  return instance.q * risk - (1.0 - instance.q) * ret;
}

double penalized_cost(const PortfolioInstance& instance, std::span<const std::uint8_t> bits) {
  check_length(instance, bits.size());
  return penalized_cost(instance, to_index(bits));
}

double penalized_cost(const PortfolioInstance& instance, BasisIndex index) {
  const double slack = instance.budget - popcount(index);
  return portfolio_cost(instance, index) + instance.penalty * slack * slack;
}

QuboProblem to_qubo(const PortfolioInstance& instance) {
  instance.validate();
  const int n = instance.n_assets();
  const double a = instance.penalty;
  const double b = instance.budget;

  // A (B - sum x)^2 = A B^2 - 2AB sum x + A sum_ij x_i x_j
  QuboProblem qubo;
  qubo.quad = instance.q * instance.sigma + Eigen::MatrixXd::Constant(n, n, a);
  qubo.lin = -(1.0 - instance.q) * instance.mu - Eigen::VectorXd::Constant(n, 2.0 * a * b);
  qubo.offset = a * b * b;
  return qubo;
}

double choose_penalty(const PortfolioInstance& instance) {
  return instance.q * instance.sigma.cwiseAbs().sum() +
         (1.0 - instance.q) * instance.mu.cwiseAbs().sum() + 1e-3;
}

std::vector<double> cost_table(const QuboProblem& problem) {
  const int n = problem.size();
  if (n > kMaxTableQubits) throw InputError("cost table limited to 24 variables");
  const std::size_t dim = std::size_t{1} << n;
  std::vector<double> values(dim);
  for (std::size_t z = 0; z < dim; ++z) values[z] = problem.evaluate(static_cast<BasisIndex>(z));
  return values;
}

}  // namespace wsqaoa
