#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wsqaoa/portfolio.hpp"
#include "wsqaoa/statevector.hpp"

namespace wsqaoa {

enum class MixerKind { standard, warmstart };

/// Depth-p ansatz over a fixed diagonal cost. Depth 0 is the initial state
/// alone: |+>^N for the standard mixer, the warm-start product state otherwise.
struct AnsatzSpec {
  MixerKind mixer = MixerKind::standard;
  std::vector<double> thetas;  // warm-start only, one per qubit
  int depth = 0;
  DiagonalCost cost;

  int n_qubits() const { return cost.n_qubits(); }

  static AnsatzSpec standard(const QuboProblem& problem, int depth);
  static AnsatzSpec warmstart(const QuboProblem& problem, std::vector<double> thetas, int depth);
};

/// How <F> is estimated.
struct ExpectationMode {
  std::uint64_t shots = 0;  // 0 selects the exact expectation
  std::uint64_t seed = 0;

  static ExpectationMode exact() { return {}; }
  static ExpectationMode sampled(std::uint64_t shots, std::uint64_t seed) { return {shots, seed}; }
  bool is_exact() const { return shots == 0; }
};

Statevector initial_state(const AnsatzSpec& spec);

/// Alternates cost phase then mixer for each layer, gammas[0]/betas[0] first.
Statevector build_state(const AnsatzSpec& spec, std::span<const double> gammas,
                        std::span<const double> betas);

double expectation(const AnsatzSpec& spec, std::span<const double> gammas,
                   std::span<const double> betas, const ExpectationMode& mode = ExpectationMode::exact());

/// <F> of an already prepared state.
double expectation(const Statevector& state, const DiagonalCost& cost,
                   const ExpectationMode& mode = ExpectationMode::exact());

struct OptimizerConfig {
  int restarts = 10;
  int max_evals_per_layer = 2000;  // budget per restart is this times p
  double simplex_tol = 1e-6;
  double initial_step = 0.1;
  double gamma_range = 6.283185307179586;  // starts drawn from [0, gamma_range)
  double beta_range = 3.141592653589793;   // starts drawn from [0, beta_range)
  std::uint64_t seed = 1;
  ExpectationMode mode = ExpectationMode::exact();
};

struct OptimizationResult {
  std::vector<double> best_gammas;
  std::vector<double> best_betas;  // wrapped into [0, pi)
  double best_expectation = 0.0;
  int evaluations = 0;
  int restarts_used = 0;
  Statevector final_state;
};

/// Parameters (gammas, betas) used as an extra starting point.
struct ParameterSeed {
  std::vector<double> gammas;
  std::vector<double> betas;
};

/// Multi-start Nelder-Mead over the 2p angles. When `seed_start` is given it
/// replaces the first random start. The result is the lowest value seen at
/// any evaluated point, ties going to the earliest restart.
OptimizationResult optimize(const AnsatzSpec& spec, const OptimizerConfig& config,
                            const std::optional<ParameterSeed>& seed_start = std::nullopt);

/// Appends a (gamma = 0, beta = 0) layer.
ParameterSeed zero_padded(const ParameterSeed& params);

}  // namespace wsqaoa
