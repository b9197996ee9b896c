#include "wsqaoa/instance_lab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "wsqaoa/metrics.hpp"
#include "wsqaoa/rng.hpp"

namespace wsqaoa {

namespace {

constexpr double kTradingDays = 252.0;

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) throw InputError("relaxed and binary vectors differ in length");
}

}  // namespace

PortfolioInstance generate_instance(std::uint64_t seed, const GeneratorOptions& options) {
  const int n = options.n_assets;
  const int t = options.t_samples;
  if (n < 2) throw InputError("generator needs at least two assets");
  if (t < n + 1) throw InputError("t_samples must be at least n + 1");

  SplitMix64 rng(seed);
  // Annualized factor variances. Drifts follow the market loading and the
  // idiosyncratic variance, so risk and return move together and the relaxed
  // optimum mixes fractional and saturated entries.
  const double market_var = 0.035;
  const double sector_var = 0.12;
  Eigen::VectorXd drift(n), beta_m(n), beta_s(n), idio_sd(n);
  for (int i = 0; i < n; ++i) {
    beta_m(i) = 0.6 + 0.8 * rng.uniform();
    beta_s(i) = -1.0 + 2.0 * rng.uniform();
    const double idio_var = 0.005 + 0.12 * rng.uniform();
    idio_sd(i) = std::sqrt(idio_var);
    drift(i) = -0.2 + 0.35 * beta_m(i) + idio_var + 0.02 * rng.normal();
  }

  const double dt = 1.0 / kTradingDays;
  const double sd_m = std::sqrt(market_var * dt);
  const double sd_s = std::sqrt(sector_var * dt);
  Eigen::MatrixXd returns(t, n);
  for (int d = 0; d < t; ++d) {
    const double fm = sd_m * rng.normal();
    const double fs = sd_s * rng.normal();
    for (int i = 0; i < n; ++i)
      returns(d, i) = drift(i) * dt + beta_m(i) * fm + beta_s(i) * fs +
                      idio_sd(i) * std::sqrt(dt) * rng.normal();
  }

  const Eigen::RowVectorXd mean = returns.colwise().mean();
  const Eigen::MatrixXd centered = returns.rowwise() - mean;
  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(t - 1);
  cov = 0.5 * (cov + cov.transpose()).eval();

  PortfolioInstance inst;
  inst.mu = kTradingDays * mean.transpose();
  inst.sigma = kTradingDays * cov;
  inst.q = options.q;
  inst.budget = options.budget;
  inst.penalty = options.penalty ? *options.penalty : choose_penalty(inst);
  inst.validate();
  return inst;
}

PortfolioInstance generate_instance(int n, std::uint64_t seed, int t_samples) {
  GeneratorOptions opt;
  opt.n_assets = n;
  opt.budget = n / 2;
  opt.t_samples = t_samples;
  return generate_instance(seed, opt);
}

PortfolioInstance appendix_instance() {
  PortfolioInstance inst;
  inst.labels = {"FRE.DE", "DTE.DE", "IFX.DE",  "SIE.DE", "ALV.DE",
                 "BAS.DE", "HEN3.DE", "LIN.DE", "RWE.DE", "MUV2.DE"};
  inst.mu.resize(10);
  inst.mu << -0.07998594, 0.0444345, 0.20639829, 0.10283742, 0.1030686, 0.05094806, 0.00832845,
      0.26801758, 0.30300314, 0.1128935;
  inst.sigma.resize(10, 10);
  inst.sigma <<
      0.0887543, 0.02804199, 0.05163708, 0.0414294, 0.04357646, 0.04001491, 0.02689946, 0.02367172, 0.03149689, 0.03734508,
      0.02804199, 0.03999579, 0.03292228, 0.02906106, 0.03254393, 0.02991219, 0.02124013, 0.01764212, 0.02967336, 0.03081729,
      0.05163708, 0.03292228, 0.13060002, 0.05737477, 0.0550938, 0.05734743, 0.0311434, 0.04352947, 0.04571444, 0.04903502,
      0.0414294, 0.02906106, 0.05737477, 0.06472856, 0.0489978, 0.05052971, 0.02730231, 0.02944869, 0.03578296, 0.04289097,
      0.04357646, 0.03254393, 0.0550938, 0.0489978, 0.06531374, 0.0503312, 0.02770636, 0.02860439, 0.03487315, 0.05488462,
      0.04001491, 0.02991219, 0.05734743, 0.05052971, 0.0503312, 0.06984039, 0.02911981, 0.02908292, 0.03458258, 0.04606973,
      0.02689946, 0.02124013, 0.0311434, 0.02730231, 0.02770636, 0.02911981, 0.04272304, 0.01806647, 0.02791279, 0.02735153,
      0.02367172, 0.01764212, 0.04352947, 0.02944869, 0.02860439, 0.02908292, 0.01806647, 0.21117209, 0.02104146, 0.02922818,
      0.03149689, 0.02967336, 0.04571444, 0.03578296, 0.03487315, 0.03458258, 0.02791279, 0.02104146, 0.11322095, 0.03446745,
      0.03734508, 0.03081729, 0.04903502, 0.04289097, 0.05488462, 0.04606973, 0.02735153, 0.02922818, 0.03446745, 0.06765634;
  inst.q = 0.5;
  inst.budget = 5;
  inst.penalty = choose_penalty(inst);
  return inst;
}

double epsilon_measure(std::span<const double> x_star, std::span<const std::uint8_t> x_opt) {
  check_lengths(x_star.size(), x_opt.size());
  double e = 0.0;
  for (std::size_t i = 0; i < x_star.size(); ++i)
    e = std::max(e, std::abs(x_star[i] - static_cast<double>(x_opt[i])));
  return e;
}

double sigma_measure(std::span<const double> x_star, std::span<const std::uint8_t> x_opt) {
  check_lengths(x_star.size(), x_opt.size());
  if (x_star.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < x_star.size(); ++i) {
    const double d = x_star[i] - static_cast<double>(x_opt[i]);
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(x_star.size()));
}

RelaxedSolution relax_instance(const PortfolioInstance& instance, const BoxQpOptions& options) {
  return solve_box_qp(convexify(to_qubo(instance)), options);
}

InstanceAnnotation annotate_instance(const PortfolioInstance& instance,
                                     const BoxQpOptions& relax_options) {
  const QuboProblem qubo = to_qubo(instance);
  const RelaxedSolution relaxed = solve_box_qp(convexify(qubo), relax_options);
  const QuboMinimum best = brute_force_minimum(qubo);
  if (popcount(best.argmin) != instance.budget)
    throw InputError("brute-force optimum violates the budget; penalty too small");

  InstanceAnnotation a;
  a.x_star = relaxed.x_star;
  a.x_opt = to_bits(best.argmin, instance.n_assets());
  const std::span<const double> xs(a.x_star.data(), static_cast<std::size_t>(a.x_star.size()));
  a.epsilon = epsilon_measure(xs, a.x_opt);
  a.sigma = sigma_measure(xs, a.x_opt);
  a.relaxation_converged = relaxed.converged;
  return a;
}

bool InstanceEnsemble::annotated() const {
  return annotations.size() == instances.size() &&
         std::all_of(annotations.begin(), annotations.end(), [](const auto& a) { return a.has_value(); });
}

InstanceEnsemble generate_ensemble(std::size_t count, std::uint64_t base_seed,
                                   const GeneratorOptions& options) {
  InstanceEnsemble ens;
  ens.options = options;
  ens.instances.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t seed = derive_seed(base_seed, i);
    ens.seeds.push_back(seed);
    ens.instances.push_back(generate_instance(seed, options));
  }
  ens.annotations.assign(count, std::nullopt);
  return ens;
}

void annotate_ensemble(InstanceEnsemble& ensemble, int threads, const BoxQpOptions& relax_options) {
  const std::size_t count = ensemble.size();
  ensemble.annotations.resize(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        ensemble.annotations[i] = annotate_instance(ensemble.instances[i], relax_options);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n_workers = std::max(1, threads);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

HotColdSplit classify_hot_cold(const InstanceEnsemble& ensemble, DeviationMeasure measure,
                               std::size_t k) {
  if (!ensemble.annotated()) throw InputError("ensemble has missing annotations");
  if (2 * k > ensemble.size()) throw InputError("k must not exceed half the ensemble");

  auto value = [&](std::size_t i) {
    const auto& a = *ensemble.annotations[i];
    return measure == DeviationMeasure::epsilon ? a.epsilon : a.sigma;
  };
  std::vector<std::size_t> order(ensemble.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (value(a) != value(b)) return value(a) < value(b);
    return ensemble.seeds[a] < ensemble.seeds[b];
  });

  HotColdSplit split;
  split.hot.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  // largest first; equal deviations keep ascending seed order
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (value(a) != value(b)) return value(a) > value(b);
    return ensemble.seeds[a] < ensemble.seeds[b];
  });
  split.cold.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  return split;
}

}  // namespace wsqaoa
