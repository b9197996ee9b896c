#include "wsqaoa/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>

#include "wsqaoa/metrics.hpp"
#include "wsqaoa/preprocessing.hpp"
#include "wsqaoa/qaoa.hpp"
#include "wsqaoa/relaxation.hpp"
#include "wsqaoa/rng.hpp"

namespace wsqaoa {

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double max_amp_diff(const Statevector& a, const Statevector& b) {
  double d = 0.0;
  for (std::size_t z = 0; z < a.dimension(); ++z) d = std::max(d, std::abs(a[z] - b[z]));
  return d;
}

Statevector random_state(int n, SplitMix64& rng) {
  std::vector<Amplitude> amps(std::size_t{1} << n);
  double norm = 0.0;
  for (auto& a : amps) {
    a = Amplitude(rng.normal(), rng.normal());
    norm += std::norm(a);
  }
  for (auto& a : amps) a /= std::sqrt(norm);
  return Statevector(n, std::move(amps));
}

}  // namespace

std::vector<CheckResult> verify_instance(const PortfolioInstance& instance, std::uint64_t seed) {
  std::vector<CheckResult> out;
  auto run = [&](const std::string& name, const std::function<std::string(bool&)>& body) {
    CheckResult c{name, false, ""};
    try {
      c.passed = true;
      c.detail = body(c.passed);
    } catch (const std::exception& e) {
      c.passed = false;
      c.detail = std::string("threw: ") + e.what();
    }
    out.push_back(c);
  };

  instance.validate();
  const int n = instance.n_assets();
  const BasisIndex dim = BasisIndex{1} << n;
  const QuboProblem qubo = to_qubo(instance);
  SplitMix64 rng(seed);

  run("qubo_equivalence", [&](bool& ok) {
    double worst = 0.0;
    for (BasisIndex z = 0; z < dim; ++z)
      worst = std::max(worst, std::abs(qubo.evaluate(z) - penalized_cost(instance, z)));
    ok = worst <= 1e-12;
    return "max deviation " + sci(worst);
  });

  run("penalty_separation", [&](bool& ok) {
    double feasible_max = -std::numeric_limits<double>::infinity();
    double infeasible_min = std::numeric_limits<double>::infinity();
    for (BasisIndex z = 0; z < dim; ++z) {
      const double v = penalized_cost(instance, z);
      if (popcount(z) == instance.budget)
        feasible_max = std::max(feasible_max, v);
      else
        infeasible_min = std::min(infeasible_min, v);
    }
    ok = infeasible_min > feasible_max;
    return "gap " + sci(infeasible_min - feasible_max);
  });

  run("qubo_psd", [&](bool& ok) {
    const double lam = min_eigenvalue(qubo.quad);
    ok = lam >= -1e-10;
    return "smallest eigenvalue " + sci(lam);
  });

  const FeasibleSpectrum spectrum = brute_force_spectrum(instance);
  RelaxedSolution relaxed;

  run("relaxation_optimality", [&](bool& ok) {
    const QuboProblem convex = convexify(qubo);
    relaxed = solve_box_qp(convex);
    const Eigen::VectorXd g = convex.gradient(relaxed.x_star);
    const double tol = 1e-9;
    for (int i = 0; i < n; ++i) {
      const double x = relaxed.x_star(i);
      const bool kkt = (x == 0.0 && g(i) >= -tol) || (x == 1.0 && g(i) <= tol) || std::abs(g(i)) <= tol;
      ok = ok && kkt;
    }
    double lowest = std::numeric_limits<double>::infinity();
    for (BasisIndex z = 0; z < dim; ++z) lowest = std::min(lowest, qubo.evaluate(z));
    ok = ok && relaxed.converged && relaxed.objective <= lowest + 1e-12;
    return "objective " + sci(relaxed.objective) + ", best binary " + sci(lowest) + ", iterations " +
           std::to_string(relaxed.iterations);
  });

  run("brute_force_feasible", [&](bool& ok) {
    const QuboMinimum best = brute_force_minimum(qubo);
    std::uint64_t binom = 1;
    for (int k = 1; k <= instance.budget; ++k) binom = binom * (n - instance.budget + k) / k;
    ok = popcount(best.argmin) == instance.budget && spectrum.feasible_count == binom &&
         std::abs(portfolio_cost(instance, best.argmin) - spectrum.fc_min) <= 1e-12;
    return "feasible strings " + std::to_string(spectrum.feasible_count);
  });

  std::vector<double> xs(relaxed.x_star.data(), relaxed.x_star.data() + relaxed.x_star.size());
  for (double& x : xs) x = std::clamp(x, 0.0, 1.0);
  if (xs.size() != static_cast<std::size_t>(n)) xs.assign(n, 0.5);
  const std::vector<double> thetas = warmstart_angles(xs);

  run("warmstart_marginals", [&](bool& ok) {
    const auto probs = measure_probabilities(init_warmstart(thetas));
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      double p1 = 0.0;
      for (BasisIndex z = 0; z < dim; ++z)
        if ((z >> i) & 1U) p1 += probs[z];
      worst = std::max(worst, std::abs(p1 - xs[i]));
    }
    ok = worst <= 1e-12;
    return "max deviation " + sci(worst);
  });

  run("warmstart_eigenstate", [&](bool& ok) {
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      const double beta = rng.uniform() * 2.0 * std::numbers::pi;
      Statevector s = init_warmstart(thetas);
      const auto before = measure_probabilities(s);
      apply_warmstart_mixer(s, beta, thetas);
      const auto after = measure_probabilities(s);
      for (std::size_t z = 0; z < before.size(); ++z) worst = std::max(worst, std::abs(after[z] - before[z]));
    }
    ok = worst <= 1e-12;
    return "max probability change " + sci(worst);
  });

  run("half_pi_reduction", [&](bool& ok) {
    const std::vector<double> half(n, std::numbers::pi / 2);
    double worst = 0.0;
    for (int t = 0; t < 5; ++t) {
      const double beta = rng.uniform() * std::numbers::pi;
      Statevector a = random_state(n, rng);
      Statevector b = a;
      apply_warmstart_mixer(a, beta, half);
      apply_standard_mixer(b, beta);
      worst = std::max(worst, max_amp_diff(a, b));
    }
    ok = worst <= 1e-12;
    return "max amplitude difference " + sci(worst);
  });

  run("norm_at_depth_7", [&](bool& ok) {
    double worst = 0.0;
    for (MixerKind kind : {MixerKind::standard, MixerKind::warmstart}) {
      const AnsatzSpec spec = kind == MixerKind::standard ? AnsatzSpec::standard(qubo, 7)
                                                          : AnsatzSpec::warmstart(qubo, thetas, 7);
      std::vector<double> g(7), b(7);
      for (int k = 0; k < 7; ++k) {
        g[k] = rng.uniform() * 2.0 * std::numbers::pi;
        b[k] = rng.uniform() * std::numbers::pi;
      }
      worst = std::max(worst, std::abs(build_state(spec, g, b).norm_squared() - 1.0));
    }
    ok = worst <= 1e-8;
    return "norm drift " + sci(worst);
  });

  run("identity_layer", [&](bool& ok) {
    double worst = 0.0;
    for (MixerKind kind : {MixerKind::standard, MixerKind::warmstart}) {
      std::vector<double> g{rng.uniform() * 6.0, rng.uniform() * 6.0};
      std::vector<double> b{rng.uniform() * 3.0, rng.uniform() * 3.0};
      auto spec = [&](int p) {
        return kind == MixerKind::standard ? AnsatzSpec::standard(qubo, p)
                                           : AnsatzSpec::warmstart(qubo, thetas, p);
      };
      const Statevector s2 = build_state(spec(2), g, b);
      g.push_back(0.0);
      b.push_back(0.0);
      worst = std::max(worst, max_amp_diff(s2, build_state(spec(3), g, b)));
    }
    ok = worst <= 1e-12;
    return "max amplitude difference " + sci(worst);
  });

  run("uniform_baseline", [&](bool& ok) {
    const auto probs = measure_probabilities(init_plus(n));
    const double P = ground_state_probability(probs, spectrum);
    double r_sum = 0.0;
    for (BasisIndex z = 0; z < dim; ++z) r_sum += approx_ratio(z, instance, spectrum);
    const double r = mean_approx_ratio(probs, instance, spectrum);
    const double expected_P = static_cast<double>(spectrum.optimal_set.size()) / static_cast<double>(dim);
    ok = P == expected_P && std::abs(r - r_sum / static_cast<double>(dim)) <= 1e-12;
    return "P " + sci(P) + ", r " + sci(r);
  });

  run("elimination_equivalence", [&](bool& ok) {
    double worst = 0.0;
    for (RoundingBounds bounds : {RoundingBounds{0.01, 0.01}, RoundingBounds{0.25, 0.25},
                                  RoundingBounds{0.1, 0.25}, RoundingBounds{0.5, 0.5}}) {
      const ReducedProblem red = eliminate(qubo, round_relaxed(xs, bounds).fixed);
      for (BasisIndex y = 0; y < (BasisIndex{1} << red.n_free()); ++y)
        worst = std::max(worst, std::abs(red.qubo.evaluate(y) - qubo.evaluate(lift(red, y))));
    }
    ok = worst <= 1e-12;
    return "max deviation " + sci(worst);
  });

  run("ratio_penalty_invariance", [&](bool& ok) {
    PortfolioInstance other = instance;
    other.penalty = instance.penalty * 3.0 + 1.0;
    const FeasibleSpectrum spec2 = brute_force_spectrum(other);
    double worst = 0.0;
    for (BasisIndex z = 0; z < dim; ++z)
      worst = std::max(worst, std::abs(approx_ratio(z, instance, spectrum) - approx_ratio(z, other, spec2)));
    ok = worst == 0.0;
    return "max change " + sci(worst);
  });

  return out;
}

}  // namespace wsqaoa
