#pragma once

#include <vector>

#include "sweetspot/circuit.hpp"
#include "sweetspot/core.hpp"

namespace sweetspot {

using Vec2 = Eigen::Vector2cd;

// phi_ext(t) = phi_dc + phi_ac P(t), P(t) = sum_n p_n e^{i n omega_d t}, p_{-n} = conj(p_n).
struct DriveSpec {
  double phi_dc = kPi;
  double phi_ac = 0.0;
  double omega_d = 1.0;       // rad/us
  std::vector<cplx> p{0.0};   // p_0 .. p_n; p_0 real

  int order() const { return static_cast<int>(p.size()) - 1; }
  double period() const { return kTwoPi / omega_d; }
  // p_k for any integer k (zero beyond the order).
  cplx harmonic(int k) const;
  // Real value of P(t).
  double value(double t) const;
  // Box constraints of the search space and omega_d > 0.
  void validate() const;
};

// Floquet modes |w(t)> = sum_k |w^[k]> e^{+i k omega_d t}.
struct FloquetSolution {
  double eps_plus = 0.0;
  double eps_minus = 0.0;
  double omega_gap = 0.0;
  double omega_d = 0.0;
  int k_max = 0;
  std::vector<Vec2> harmonics_plus;   // index k + k_max
  std::vector<Vec2> harmonics_minus;
  Vec2 initial_plus = Vec2::Zero();   // normalized |w_+(0)>
  Vec2 initial_minus = Vec2::Zero();

  const Vec2& plus(int k) const { return harmonics_plus[static_cast<size_t>(k + k_max)]; }
  const Vec2& minus(int k) const { return harmonics_minus[static_cast<size_t>(k + k_max)]; }
  Vec2 mode_plus_at(double t) const;
  Vec2 mode_minus_at(double t) const;
  double harmonic_norm_plus() const;
  double harmonic_norm_minus() const;
};

// g_j^[k] = 1/(b_j T) int_0^T Tr[sigma_z tau_j^dagger(t)] e^{i k omega_d t} dt.
struct FilterWeights {
  static constexpr double a_z = 4.0;
  static constexpr double a_pm = 1.0;
  static constexpr double b_z = 2.0;
  static constexpr double b_pm = 1.0;

  int k_max = 0;
  std::vector<cplx> g_z;      // index k + k_max
  std::vector<cplx> g_plus;
  std::vector<cplx> g_minus;

  cplx z(int k) const { return at(g_z, k); }
  cplx plus(int k) const { return at(g_plus, k); }
  cplx minus(int k) const { return at(g_minus, k); }

  // sum_k (|g_+|^2/2 + |g_-|^2/2 + |g_z|^2); equals 1 for exact solutions.
  double parseval_sum() const;
  double plus_weight() const;   // sum_k |g_+^[k]|^2
  double z_weight() const;      // sum_k |g_z^[k]|^2

 private:
  cplx at(const std::vector<cplx>& g, int k) const {
    return (k < -k_max || k > k_max) ? cplx{} : g[static_cast<size_t>(k + k_max)];
  }
};

// Default truncation of the Floquet matrix for a drive of order n.
inline int default_k_max(int order) { return 3 * std::max(order, 1); }

CMatrix assemble_floquet_matrix(const DriveSpec& drive, const EffectiveCoefficients& coeffs,
                                double delta, int k_max);

FloquetSolution solve_floquet(const CMatrix& matrix, double omega_d);

// Convenience: assemble + solve with k_max = default_k_max(order) unless given.
FloquetSolution solve_drive(const DriveSpec& drive, const EffectiveCoefficients& coeffs,
                            double delta, int k_max = 0);

// One-period propagator reference. Harmonics are reconstructed up to |k| <= k_max
// (default_k_max when 0). Doubles the grid until quasienergies move by < 1e-9.
FloquetSolution reference_floquet_via_propagator(const DriveSpec& drive,
                                                 const EffectiveCoefficients& coeffs,
                                                 double delta, int substeps = 1024,
                                                 int k_max = 0);

// 1 - |<w_+^a(0)|w_+^b(0)>| with branches matched by quasienergy modulo omega_d.
double mode_infidelity(const FloquetSolution& a, const FloquetSolution& b);

FilterWeights compute_filter_weights(const FloquetSolution& sol);

// Two-level Hamiltonian H_q(t) of the effective model.
Mat2 qubit_hamiltonian(const DriveSpec& drive, const EffectiveCoefficients& coeffs, double delta,
                       double t);

// exp(-i Omega) over [t, t + h] with the fourth-order Magnus expansion.
Mat2 magnus4_step(const DriveSpec& drive, const EffectiveCoefficients& coeffs, double delta,
                  double t, double h);

}  // namespace sweetspot
