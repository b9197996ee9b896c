#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "wsqaoa/bits.hpp"

namespace wsqaoa {

using Amplitude = std::complex<double>;

inline constexpr int kMaxQubits = 24;

/// Dense 2^N amplitude vector. Basis index bit i is qubit i.
class Statevector {
 public:
  Statevector() = default;
  Statevector(int n_qubits, std::vector<Amplitude> amplitudes);

  int n_qubits() const { return n_qubits_; }
  std::size_t dimension() const { return amplitudes_.size(); }
  std::span<const Amplitude> amplitudes() const { return amplitudes_; }
  std::span<Amplitude> amplitudes() { return amplitudes_; }
  const Amplitude& operator[](std::size_t z) const { return amplitudes_[z]; }

  double norm_squared() const;

 private:
  int n_qubits_ = 0;
  std::vector<Amplitude> amplitudes_;
};

/// Diagonal cost operator: values[z] is the QUBO cost of basis state z.
struct DiagonalCost {
  std::vector<double> values;
  /// Set when values come from a quadratic form in the bits (any QUBO).
  /// The phase layer then factorizes over a split of the qubits and needs
  /// far fewer sin/cos calls.
  bool quadratic = false;

  int n_qubits() const;
};

/// Counts per observed basis index.
using ShotHistogram = std::map<BasisIndex, std::uint64_t>;

/// |+>^N.
Statevector init_plus(int n);

/// Product of R_Y(theta_i)|0>: qubit i reads 1 with probability sin^2(theta_i / 2).
Statevector init_warmstart(std::span<const double> thetas);

/// theta_i = 2 asin(sqrt(x_i)).
std::vector<double> warmstart_angles(std::span<const double> x_star);

// In-place layer updates. Each keeps the norm.

/// amplitude[z] *= exp(-i gamma values[z]).
void apply_cost_phase(Statevector& state, const DiagonalCost& cost, double gamma);

/// prod_i exp(i beta X_i).
void apply_standard_mixer(Statevector& state, double beta);

/// prod_i exp(i beta (sin(theta_i) X_i + cos(theta_i) Z_i)); the warm-start
/// initial state is its eigenvector with eigenvalue exp(i N beta).
void apply_warmstart_mixer(Statevector& state, double beta, std::span<const double> thetas);

std::vector<double> measure_probabilities(const Statevector& state);

/// Multinomial sample of `shots` measurements. Reproducible for a given seed
/// across platforms (the sampler uses raw 64-bit Mersenne Twister output).
ShotHistogram sample_shots(const Statevector& state, std::uint64_t shots, std::uint64_t seed);
ShotHistogram sample_shots(std::span<const double> probabilities, std::uint64_t shots,
                           std::uint64_t seed);

}  // namespace wsqaoa
