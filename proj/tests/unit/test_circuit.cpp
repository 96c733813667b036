#include "doctest.h"
#include "fixtures.hpp"

using namespace sweetspot;

TEST_CASE("default circuit at the sweet spot matches the dense oracle") {
  const EffectiveQubit eq = diagonalize_circuit(CircuitParams{}, kPi);
  CHECK(fixtures::rel(eq.delta, fixtures::kDelta) < 1e-10);
  CHECK(fixtures::rel(eq.phi_ge, fixtures::kPhiGe) < 1e-10);
  CHECK(eq.spectrum.size() >= 2);
  CHECK(eq.spectrum[1] - eq.spectrum[0] == doctest::Approx(eq.delta).epsilon(1e-14));
}

TEST_CASE("harmonic limit") {
  CircuitParams cp;
  cp.e_j = 0.0;
  cp.fock_dim = 40;
  const EffectiveQubit eq = diagonalize_circuit(cp, kPi);
  CHECK(fixtures::rel(eq.delta, std::sqrt(8.0 * cp.e_c * cp.e_l)) < 1e-10);
  CHECK(fixtures::rel(eq.phi_ge, cp.phi_zpf()) < 1e-10);
}

TEST_CASE("spectrum is symmetric about half flux") {
  const double x = 0.03 * kPi;
  const EffectiveQubit a = diagonalize_circuit(CircuitParams{}, kPi + x);
  const EffectiveQubit b = diagonalize_circuit(CircuitParams{}, kPi - x);
  for (size_t i = 0; i < a.spectrum.size(); ++i) {
    CHECK(std::abs(a.spectrum[i] - b.spectrum[i]) < 1e-9 * std::abs(b.spectrum[i]) + 1e-7);
  }
}

TEST_CASE("Hamiltonian is Hermitian") {
  const RMatrix h = build_circuit_hamiltonian(CircuitParams{}, 0.9 * kPi);
  CHECK((h - h.transpose()).cwiseAbs().maxCoeff() < 1e-12 * h.cwiseAbs().maxCoeff());
}

TEST_CASE("truncation is Cauchy on default parameters") {
  double prev = 1e300;
  for (int d = 20; d <= 120; d += 20) {
    CircuitParams a, b;
    a.fock_dim = d;
    b.fock_dim = d + 20;
    const double diff = std::abs(diagonalize_circuit(a, kPi, 1.0).delta -
                                 diagonalize_circuit(b, kPi, 1.0).delta);
    // beyond d = 60 the differences sit at the roundoff floor
    if (d >= 60) CHECK(diff < 1e-9 * fixtures::kDelta);
    else CHECK(diff <= prev);
    prev = diff;
  }
}

TEST_CASE("effective coefficients") {
  EffectiveQubit eq;
  eq.delta = fixtures::kDelta;
  eq.phi_ge = fixtures::kPhiGe;
  const double el = kTwoPi * 790.0;
  CHECK(effective_coefficients(eq, el, kPi, 0.1).b_coef == 0.0);
  CHECK(effective_coefficients(eq, el, 1.2, 0.0).a_coef == 0.0);
  const auto c = effective_coefficients(eq, el, 1.03 * kPi, 0.004 * kPi);
  CHECK(c.b_coef == doctest::Approx(2.0 * el * 0.03 * kPi * fixtures::kPhiGe).epsilon(1e-13));
  CHECK(c.a_coef == doctest::Approx(el * 0.004 * kPi * fixtures::kPhiGe).epsilon(1e-13));
}

TEST_CASE("invalid circuits are rejected") {
  CircuitParams cp;
  cp.e_c = 0.0;
  CHECK_THROWS_AS(diagonalize_circuit(cp, kPi), Error);
  cp = CircuitParams{};
  cp.fock_dim = 10;
  CHECK_THROWS_AS(diagonalize_circuit(cp, kPi), Error);
}
