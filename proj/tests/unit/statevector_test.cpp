#include <doctest.h>

#include <numbers>

#include "oracles.hpp"
#include "wsqaoa/instance_lab.hpp"
#include "wsqaoa/rng.hpp"
#include "wsqaoa/statevector.hpp"

using namespace wsqaoa;
using std::numbers::pi;

namespace {

Statevector random_state(int n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<Amplitude> a(std::size_t{1} << n);
  double s = 0.0;
  for (auto& v : a) {
    v = {rng.normal(), rng.normal()};
    s += std::norm(v);
  }
  for (auto& v : a) v /= std::sqrt(s);
  return Statevector(n, a);
}

Statevector basis(int n, BasisIndex z) {
  std::vector<Amplitude> a(std::size_t{1} << n);
  a[z] = 1.0;
  return Statevector(n, a);
}

double diff(const Statevector& s, const oracle::CVec& v) {
  double d = 0.0;
  for (std::size_t z = 0; z < s.dimension(); ++z) d = std::max(d, std::abs(s[z] - v(z)));
  return d;
}

std::vector<double> random_thetas(int n, SplitMix64& rng) {
  std::vector<double> t(n);
  for (auto& v : t) v = rng.uniform() * pi;
  return t;
}

}  // namespace

TEST_CASE("plus state") {
  const auto one = init_plus(1);
  CHECK(one[0].real() == doctest::Approx(0.7071067812));
  CHECK(one[1].real() == doctest::Approx(0.7071067812));
  const auto ten = init_plus(10);
  for (std::size_t z = 0; z < 1024; ++z) REQUIRE(ten[z] == Amplitude(1.0 / 32.0, 0.0));
}

TEST_CASE("warm-start angles and initial state") {
  const std::vector<double> x{0.0, 0.5, 1.0};
  const auto t = warmstart_angles(x);
  CHECK(t[0] == 0.0);
  CHECK(t[1] == doctest::Approx(pi / 2));
  CHECK(t[2] == doctest::Approx(pi));
  const auto s = init_warmstart(std::vector<double>{0.0});
  CHECK(std::abs(s[0] - 1.0) < 1e-15);
  CHECK(std::abs(s[1]) < 1e-15);
  const auto h = init_warmstart(std::vector<double>{pi / 2});
  CHECK(h[0].real() == doctest::Approx(std::sqrt(0.5)));
  CHECK(h[1].real() == doctest::Approx(std::sqrt(0.5)));
  CHECK_THROWS_AS(warmstart_angles(std::vector<double>{1.2}), InputError);
}

TEST_CASE("warm-start marginals equal x") {
  const std::vector<double> x{0.1, 0.9, 0.33, 0.0, 1.0, 0.5};
  const auto probs = measure_probabilities(init_warmstart(warmstart_angles(x)));
  for (int i = 0; i < 6; ++i) {
    double p1 = 0.0;
    for (std::size_t z = 0; z < probs.size(); ++z)
      if ((z >> i) & 1U) p1 += probs[z];
    CHECK(std::abs(p1 - x[i]) <= 1e-12);
  }
}

TEST_CASE("cost phase") {
  auto s = random_state(5, 3);
  const auto ref = s;
  DiagonalCost c{std::vector<double>(32, 0.7)};
  apply_cost_phase(s, c, 0.0);
  for (std::size_t z = 0; z < 32; ++z) CHECK(s[z] == ref[z]);
  apply_cost_phase(s, c, 1.3);
  const Amplitude g = std::exp(Amplitude(0, -1.3 * 0.7));
  for (std::size_t z = 0; z < 32; ++z) CHECK(std::abs(s[z] - g * ref[z]) < 1e-14);
}

TEST_CASE("cost phase matches exp(-i gamma C)") {
  SplitMix64 rng(5);
  auto s = random_state(6, 8);
  const auto ref = s;
  std::vector<double> v(64);
  for (auto& x : v) x = rng.normal();
  apply_cost_phase(s, DiagonalCost{v}, 0.77);
  for (std::size_t z = 0; z < 64; ++z) CHECK(std::abs(s[z] - std::exp(Amplitude(0, -0.77 * v[z])) * ref[z]) < 1e-13);
  CHECK(std::abs(s.norm_squared() - 1.0) <= 1e-12);
}

TEST_CASE("factorized quadratic phase agrees with the generic path") {
  const auto qubo = to_qubo(generate_instance(3));
  const auto table = cost_table(qubo);
  auto a = random_state(10, 1);
  auto b = a;
  apply_cost_phase(a, DiagonalCost{table, false}, 0.413);
  apply_cost_phase(b, DiagonalCost{table, true}, 0.413);
  double d = 0.0;
  for (std::size_t z = 0; z < a.dimension(); ++z) d = std::max(d, std::abs(a[z] - b[z]));
  CHECK(d <= 1e-12);
}

TEST_CASE("standard mixer against matrix exponential") {
  for (double beta : {0.0, 0.3, 1.1, pi / 2, 2.9}) {
    auto s = random_state(4, 2);
    const oracle::CVec expect = oracle::standard_mixer_unitary(beta, 4) * oracle::to_cvec({s.amplitudes().begin(), s.amplitudes().end()});
    apply_standard_mixer(s, beta);
    CHECK(diff(s, expect) <= 1e-12);
  }
}

TEST_CASE("standard mixer at pi/2 flips every qubit") {
  auto s = basis(5, 0);
  apply_standard_mixer(s, pi / 2);
  const auto p = measure_probabilities(s);
  CHECK(p[31] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("warm-start mixer against matrix exponential") {
  SplitMix64 rng(21);
  for (int t = 0; t < 5; ++t) {
    const auto th = random_thetas(4, rng);
    const double beta = rng.uniform() * pi;
    auto s = random_state(4, 100 + t);
    // the mixer is exp(-i beta H) with H = -sum(sin X + cos Z)
    const oracle::CVec expect = oracle::warmstart_mixer_unitary(beta, th) * oracle::to_cvec({s.amplitudes().begin(), s.amplitudes().end()});
    apply_warmstart_mixer(s, beta, th);
    CHECK(diff(s, expect) <= 1e-12);
  }
}

TEST_CASE("warm-start mixer reduces to standard mixer at pi/2") {
  const std::vector<double> half(6, pi / 2);
  for (double beta : {0.2, 1.0, 2.5}) {
    auto a = random_state(6, 9);
    auto b = a;
    apply_warmstart_mixer(a, beta, half);
    apply_standard_mixer(b, beta);
    for (std::size_t z = 0; z < a.dimension(); ++z) REQUIRE(std::abs(a[z] - b[z]) <= 1e-12);
  }
}

TEST_CASE("warm-start initial state is a mixer eigenstate") {
  SplitMix64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const auto th = random_thetas(7, rng);
    auto s = init_warmstart(th);
    const auto before = measure_probabilities(s);
    apply_warmstart_mixer(s, rng.uniform() * 2 * pi, th);
    const auto after = measure_probabilities(s);
    for (std::size_t z = 0; z < before.size(); ++z) REQUIRE(std::abs(after[z] - before[z]) <= 1e-12);
  }
}

TEST_CASE("mixers at beta zero are the identity") {
  auto s = random_state(5, 6);
  const auto ref = s;
  apply_standard_mixer(s, 0.0);
  apply_warmstart_mixer(s, 0.0, std::vector<double>(5, 0.4));
  for (std::size_t z = 0; z < 32; ++z) CHECK(std::abs(s[z] - ref[z]) < 1e-15);
}

TEST_CASE("angle count must match") {
  auto s = init_plus(3);
  CHECK_THROWS_AS(apply_warmstart_mixer(s, 0.1, std::vector<double>(2, 0.1)), InputError);
  CHECK_THROWS_AS(apply_cost_phase(s, DiagonalCost{std::vector<double>(4)}, 0.1), InputError);
}

TEST_CASE("measure probabilities") {
  const auto u = measure_probabilities(init_plus(4));
  for (double p : u) CHECK(p == 1.0 / 16);
  const auto e = measure_probabilities(basis(4, 15));
  CHECK(e[15] == 1.0);
  const auto r = measure_probabilities(random_state(8, 12));
  double s = 0.0;
  for (double p : r) s += p;
  CHECK(std::abs(s - 1.0) <= 1e-10);
}

TEST_CASE("shots on a basis state") {
  const auto h = sample_shots(basis(6, 37), 500, 1);
  REQUIRE(h.size() == 1);
  CHECK(h.begin()->first == 37);
  CHECK(h.begin()->second == 500);
}

TEST_CASE("shot sampling is deterministic") {
  const auto s = random_state(6, 4);
  CHECK(sample_shots(s, 1000, 42) == sample_shots(s, 1000, 42));
  CHECK(sample_shots(s, 1000, 42) != sample_shots(s, 1000, 43));
}

TEST_CASE("uniform 10-qubit shots stay within 5 sigma") {
  const auto h = sample_shots(init_plus(10), 1000, 2024);
  const double p = 1.0 / 1024, sd = std::sqrt(1000 * p * (1 - p));
  std::uint64_t total = 0;
  for (BasisIndex z = 0; z < 1024; ++z) {
    const auto it = h.find(z);
    const double c = it == h.end() ? 0.0 : static_cast<double>(it->second);
    total += static_cast<std::uint64_t>(c);
    REQUIRE(std::abs(c - 1000 * p) <= 5 * sd);
  }
  CHECK(total == 1000);
}

TEST_CASE("shot frequencies converge to probabilities") {
  const auto s = random_state(3, 77);
  const auto p = measure_probabilities(s);
  const std::uint64_t n = 200000;
  const auto h = sample_shots(s, n, 5);
  for (BasisIndex z = 0; z < 8; ++z) {
    const auto it = h.find(z);
    const double f = it == h.end() ? 0.0 : static_cast<double>(it->second) / n;
    CHECK(std::abs(f - p[z]) <= 5 * std::sqrt(p[z] * (1 - p[z]) / n) + 1e-12);
  }
}

TEST_CASE("statevector construction checks") {
  CHECK_THROWS_AS(Statevector(3, std::vector<Amplitude>(7)), InputError);
  CHECK_THROWS_AS(init_plus(kMaxQubits + 1), InputError);
}
