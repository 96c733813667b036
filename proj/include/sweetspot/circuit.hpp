#pragma once

#include <vector>

#include "sweetspot/core.hpp"

namespace sweetspot {

// Fluxonium circuit energies. All energies are angular frequencies in rad/us.
struct CircuitParams {
  double e_c = kTwoPi * 1000.0;
  double e_l = kTwoPi * 790.0;
  double e_j = kTwoPi * 4430.0;
  int fock_dim = 110;

  void validate() const;
  double phi_zpf() const;
  double n_zpf() const;
};

// Lowest two circuit levels collapsed to a qubit.
struct EffectiveQubit {
  double delta = 0.0;   // E_1 - E_0, rad/us
  double phi_ge = 0.0;  // |<g|phi|e>|
  std::vector<double> spectrum;
};

// A and B of the two-level model H = Delta/2 sx + B/2 sz + A P(t) sz.
struct EffectiveCoefficients {
  double a_coef = 0.0;
  double b_coef = 0.0;
};

RMatrix build_circuit_hamiltonian(const CircuitParams& params, double phi_ext);

// Diagonalizes at fock_dim and fock_dim + 20; throws TruncationTooSmall
// when delta moves by more than `rel_tol` between the two.
EffectiveQubit diagonalize_circuit(const CircuitParams& params, double phi_ext,
                                   double rel_tol = 1e-8, int levels = 6);

EffectiveCoefficients effective_coefficients(const EffectiveQubit& eq, double e_l,
                                             double phi_dc, double phi_ac);

}  // namespace sweetspot
