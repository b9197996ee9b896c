#include "wsqaoa/qaoa.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "wsqaoa/nelder_mead.hpp"
#include "wsqaoa/rng.hpp"

namespace wsqaoa {

namespace {

void check_params(const AnsatzSpec& spec, std::span<const double> gammas,
                  std::span<const double> betas) {
  if (spec.depth < 0) throw InputError("depth must be nonnegative");
  if (gammas.size() != static_cast<std::size_t>(spec.depth) ||
      betas.size() != static_cast<std::size_t>(spec.depth))
    throw InputError("need exactly p gammas and p betas");
}

double wrap_beta(double beta) {
  double b = std::fmod(beta, std::numbers::pi);
  if (b < 0.0) b += std::numbers::pi;
  return b;
}

}  // namespace

AnsatzSpec AnsatzSpec::standard(const QuboProblem& problem, int depth) {
  if (depth < 0) throw InputError("depth must be nonnegative");
  return AnsatzSpec{MixerKind::standard, {}, depth, DiagonalCost{cost_table(problem), true}};
}

AnsatzSpec AnsatzSpec::warmstart(const QuboProblem& problem, std::vector<double> thetas,
                                 int depth) {
  if (depth < 0) throw InputError("depth must be nonnegative");
  if (static_cast<int>(thetas.size()) != problem.size())
    throw InputError("one warm-start angle per variable required");
  return AnsatzSpec{MixerKind::warmstart, std::move(thetas), depth,
                    DiagonalCost{cost_table(problem), true}};
}

Statevector initial_state(const AnsatzSpec& spec) {
  return spec.mixer == MixerKind::standard ? init_plus(spec.n_qubits()) : init_warmstart(spec.thetas);
}

Statevector build_state(const AnsatzSpec& spec, std::span<const double> gammas,
                        std::span<const double> betas) {
  check_params(spec, gammas, betas);
  Statevector state = initial_state(spec);
  for (int layer = 0; layer < spec.depth; ++layer) {
    apply_cost_phase(state, spec.cost, gammas[layer]);
    if (spec.mixer == MixerKind::standard)
      apply_standard_mixer(state, betas[layer]);
    else
      apply_warmstart_mixer(state, betas[layer], spec.thetas);
  }
  return state;
}

double expectation(const Statevector& state, const DiagonalCost& cost, const ExpectationMode& mode) {
  if (cost.values.size() != state.dimension()) throw InputError("cost diagonal dimension mismatch");
  if (mode.is_exact()) {
    double e = 0.0;
    const auto amps = state.amplitudes();
    for (std::size_t z = 0; z < amps.size(); ++z) e += std::norm(amps[z]) * cost.values[z];
    return e;
  }
  const auto hist = sample_shots(state, mode.shots, mode.seed);
  double e = 0.0;
  for (const auto& [z, count] : hist) e += static_cast<double>(count) * cost.values[z];
  return e / static_cast<double>(mode.shots);
}

double expectation(const AnsatzSpec& spec, std::span<const double> gammas,
                   std::span<const double> betas, const ExpectationMode& mode) {
  return expectation(build_state(spec, gammas, betas), spec.cost, mode);
}

ParameterSeed zero_padded(const ParameterSeed& params) {
  ParameterSeed out = params;
  out.gammas.push_back(0.0);
  out.betas.push_back(0.0);
  return out;
}

OptimizationResult optimize(const AnsatzSpec& spec, const OptimizerConfig& config,
                            const std::optional<ParameterSeed>& seed_start) {
  if (config.restarts < 1) throw InputError("optimizer needs at least one restart");
  const int p = spec.depth;
  OptimizationResult result;

  if (p == 0) {
    result.final_state = initial_state(spec);
    result.best_expectation = expectation(result.final_state, spec.cost, config.mode);
    result.evaluations = 1;
    return result;
  }
  if (seed_start && (seed_start->gammas.size() != static_cast<std::size_t>(p) ||
                     seed_start->betas.size() != static_cast<std::size_t>(p)))
    throw InputError("seed parameters must have length p");

  // Best point over every evaluation of every restart.
  std::vector<double> best_x;
  double best_value = std::numeric_limits<double>::infinity();
  int total_evals = 0;

  auto objective = [&](const std::vector<double>& x) {
    const std::span<const double> all(x);
    const double v = expectation(spec, all.first(p), all.subspan(p), config.mode);
    ++total_evals;
    if (v < best_value) {
      best_value = v;
      best_x = x;
    }
    return v;
  };

  NelderMeadOptions nm;
  nm.max_evals = config.max_evals_per_layer * p;
  nm.tol = config.simplex_tol;
  nm.initial_step = config.initial_step;

  for (int r = 0; r < config.restarts; ++r) {
    std::vector<double> start(2 * static_cast<std::size_t>(p));
    if (r == 0 && seed_start) {
      std::copy(seed_start->gammas.begin(), seed_start->gammas.end(), start.begin());
      std::copy(seed_start->betas.begin(), seed_start->betas.end(), start.begin() + p);
    } else {
      SplitMix64 rng(derive_seed(config.seed, static_cast<std::uint64_t>(r)));
      for (int k = 0; k < p; ++k) start[k] = rng.uniform() * config.gamma_range;
      for (int k = 0; k < p; ++k) start[p + k] = rng.uniform() * config.beta_range;
    }
    nelder_mead(objective, std::move(start), nm);
    ++result.restarts_used;
  }

  result.best_gammas.assign(best_x.begin(), best_x.begin() + p);
  result.best_betas.resize(p);
  for (int k = 0; k < p; ++k) result.best_betas[k] = wrap_beta(best_x[p + k]);
  result.evaluations = total_evals;
  result.final_state = build_state(spec, result.best_gammas, result.best_betas);
  result.best_expectation = best_value;
  return result;
}

}  // namespace wsqaoa
