#include "wsqaoa/statevector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace wsqaoa {

namespace {

void check_qubits(int n) {
  if (n < 1 || n > kMaxQubits)
    throw InputError("qubit count " + std::to_string(n) + " outside [1, 24]");
}

void check_angles(std::span<const double> thetas) {
  for (double t : thetas)
    if (!(t >= 0.0 && t <= std::numbers::pi)) throw InputError("warm-start angle outside [0, pi]");
}

inline Amplitude cmul(Amplitude a, Amplitude b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

// Both mixers act on qubit pairs (a0, a1) = (amp[k], amp[k + stride]) as
//   a0' = (cb + i u) a0 + i w a1,   a1' = i w a0 + (cb - i u) a1
// with u = 0 for the standard mixer. Written on raw doubles so the loop
// vectorizes; std::complex multiplication does not.
void apply_pair_rotation(std::span<Amplitude> amps, int qubit, double cb, double u, double w) {
  double* a = reinterpret_cast<double*>(amps.data());
  const std::size_t stride = std::size_t{1} << qubit;
  const std::size_t dim = amps.size();
  for (std::size_t base = 0; base < dim; base += 2 * stride) {
    double* __restrict lo = a + 2 * base;
    double* __restrict hi = a + 2 * (base + stride);
    for (std::size_t k = 0; k < 2 * stride; k += 2) {
      const double r0 = lo[k], i0 = lo[k + 1];
      const double r1 = hi[k], i1 = hi[k + 1];
      lo[k] = cb * r0 - u * i0 - w * i1;
      lo[k + 1] = cb * i0 + u * r0 + w * r1;
      hi[k] = cb * r1 + u * i1 - w * i0;
      hi[k + 1] = cb * i1 - u * r1 + w * r0;
    }
  }
}

}  // namespace

Statevector::Statevector(int n_qubits, std::vector<Amplitude> amplitudes)
    : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
  check_qubits(n_qubits);
  if (amplitudes_.size() != (std::size_t{1} << n_qubits))
    throw InputError("amplitude vector length must be 2^n");
}

double Statevector::norm_squared() const {
  double s = 0.0;
  for (const auto& a : amplitudes_) s += std::norm(a);
  return s;
}

int DiagonalCost::n_qubits() const {
  const std::size_t dim = values.size();
  if (dim < 2 || (dim & (dim - 1)) != 0) throw InputError("diagonal length must be a power of two");
  return std::countr_zero(dim);
}

Statevector init_plus(int n) {
  check_qubits(n);
  const std::size_t dim = std::size_t{1} << n;
  const double amp = std::pow(2.0, -0.5 * n);
  return Statevector(n, std::vector<Amplitude>(dim, Amplitude(amp, 0.0)));
}

Statevector init_warmstart(std::span<const double> thetas) {
  const int n = static_cast<int>(thetas.size());
  check_qubits(n);
  check_angles(thetas);
  std::vector<double> c(n), s(n);
  for (int i = 0; i < n; ++i) {
    c[i] = std::cos(0.5 * thetas[i]);
    s[i] = std::sin(0.5 * thetas[i]);
  }
  const std::size_t dim = std::size_t{1} << n;
  std::vector<Amplitude> amps(dim);
  for (std::size_t z = 0; z < dim; ++z) {
    double a = 1.0;
    for (int i = 0; i < n; ++i) a *= ((z >> i) & 1U) ? s[i] : c[i];
    amps[z] = a;
  }
  return Statevector(n, std::move(amps));
}

std::vector<double> warmstart_angles(std::span<const double> x_star) {
  std::vector<double> thetas(x_star.size());
  for (std::size_t i = 0; i < x_star.size(); ++i) {
    const double x = x_star[i];
    if (!(x >= 0.0 && x <= 1.0)) throw InputError("relaxed value outside [0, 1]");
    thetas[i] = 2.0 * std::asin(std::sqrt(x));
  }
  return thetas;
}

void apply_cost_phase(Statevector& state, const DiagonalCost& cost, double gamma) {
  if (cost.values.size() != state.dimension()) throw InputError("cost diagonal dimension mismatch");
  auto amps = state.amplitudes();
  const int n = state.n_qubits();
  if (!cost.quadratic || n < 4) {
    for (std::size_t z = 0; z < amps.size(); ++z) {
      const double phi = -gamma * cost.values[z];
      amps[z] = cmul(amps[z], Amplitude(std::cos(phi), std::sin(phi)));
    }
    return;
  }

  // z = lo + (hi << n_lo). For a quadratic cost
  //   c(z) = c(lo) + c(hi << n_lo) - c(0) + sum_{j in hi} s_j(lo)
  // where s_j(lo) collects the couplings between qubit j and the bits of lo.
  const int n_lo = n / 2;
  const int n_hi = n - n_lo;
  const std::size_t dim_lo = std::size_t{1} << n_lo;
  const std::size_t dim_hi = std::size_t{1} << n_hi;
  const auto& v = cost.values;
  auto phase = [gamma](double c) { return Amplitude(std::cos(gamma * c), -std::sin(gamma * c)); };

  std::vector<Amplitude> hi_phase(dim_hi);
  for (std::size_t h = 0; h < dim_hi; ++h) hi_phase[h] = phase(v[h << n_lo] - v[0]);

  std::vector<Amplitude> prod(dim_hi);
  std::vector<Amplitude> w(n_hi);
  for (std::size_t lo = 0; lo < dim_lo; ++lo) {
    for (int j = 0; j < n_hi; ++j) {
      const std::size_t bit = std::size_t{1} << (n_lo + j);
      w[j] = phase(v[lo | bit] - v[lo] - v[bit] + v[0]);
    }
    prod[0] = phase(v[lo]);
    for (int j = 0; j < n_hi; ++j) {
      const std::size_t half = std::size_t{1} << j;
      for (std::size_t h = 0; h < half; ++h) prod[half + h] = cmul(prod[h], w[j]);
    }
    for (std::size_t h = 0; h < dim_hi; ++h) {
      Amplitude& a = amps[lo + (h << n_lo)];
      a = cmul(a, cmul(prod[h], hi_phase[h]));
    }
  }
}

void apply_standard_mixer(Statevector& state, double beta) {
  const double cb = std::cos(beta);
  const double sb = std::sin(beta);
  for (int q = 0; q < state.n_qubits(); ++q) apply_pair_rotation(state.amplitudes(), q, cb, 0.0, sb);
}

void apply_warmstart_mixer(Statevector& state, double beta, std::span<const double> thetas) {
  if (static_cast<int>(thetas.size()) != state.n_qubits())
    throw InputError("one warm-start angle per qubit required");
  check_angles(thetas);
  const double cb = std::cos(beta);
  const double sb = std::sin(beta);
  for (int q = 0; q < state.n_qubits(); ++q) {
    const double sx = std::sin(thetas[q]);
    const double cz = std::cos(thetas[q]);
    // cos(b) I + i sin(b) (sin(t) X + cos(t) Z)
    apply_pair_rotation(state.amplitudes(), q, cb, sb * cz, sb * sx);
  }
}

std::vector<double> measure_probabilities(const Statevector& state) {
  std::vector<double> p(state.dimension());
  const auto amps = state.amplitudes();
  for (std::size_t z = 0; z < p.size(); ++z) p[z] = std::norm(amps[z]);
  return p;
}

ShotHistogram sample_shots(const Statevector& state, std::uint64_t shots, std::uint64_t seed) {
  const auto p = measure_probabilities(state);
  return sample_shots(p, shots, seed);
}

ShotHistogram sample_shots(std::span<const double> probabilities, std::uint64_t shots,
                           std::uint64_t seed) {
  if (shots < 1) throw InputError("at least one shot required");
  if (probabilities.empty()) throw InputError("empty distribution");
  std::vector<double> cdf(probabilities.size());
  double total = 0.0;
  for (std::size_t z = 0; z < probabilities.size(); ++z) {
    total += std::max(probabilities[z], 0.0);
    cdf[z] = total;
  }
  if (!(total > 0.0)) throw InputError("distribution has no mass");

  std::mt19937_64 rng(seed);
  ShotHistogram hist;
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
    // first entry with cdf > u always carries positive mass
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    ++hist[static_cast<BasisIndex>(it - cdf.begin())];
  }
  return hist;
}

}  // namespace wsqaoa
