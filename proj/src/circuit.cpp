#include "sweetspot/circuit.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace sweetspot {

void CircuitParams::validate() const {
  if (!(e_c > 0.0) || !(e_l > 0.0) || !(e_j >= 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "circuit energies must be positive (E_J may be zero)");
  }
  if (fock_dim < 20) {
    throw Error(ErrorKind::InvalidParameter, "fock_dim must be at least 20");
  }
}

double CircuitParams::phi_zpf() const { return std::pow(2.0 * e_c / e_l, 0.25); }
double CircuitParams::n_zpf() const { return std::pow(e_l / (32.0 * e_c), 0.25); }

namespace {

// Position-like quadrature a + a^dagger in a truncated Fock basis.
RMatrix quadrature(int dim) {
  RMatrix x = RMatrix::Zero(dim, dim);
  for (int k = 0; k + 1 < dim; ++k) {
    x(k, k + 1) = x(k + 1, k) = std::sqrt(static_cast<double>(k + 1));
  }
  return x;
}

struct Operators {
  RMatrix phi;
  RMatrix n_squared;
  RMatrix cos_phi;
};

Operators circuit_operators(const CircuitParams& params) {
  const int dim = params.fock_dim;
  Operators ops;
  ops.phi = params.phi_zpf() * quadrature(dim);

  // n = i n_zpf (a^dag - a); n^2 = -n_zpf^2 (a^dag - a)^2 is real symmetric.
  RMatrix p = RMatrix::Zero(dim, dim);
  for (int k = 0; k + 1 < dim; ++k) {
    p(k + 1, k) = std::sqrt(static_cast<double>(k + 1));
    p(k, k + 1) = -std::sqrt(static_cast<double>(k + 1));
  }
  const double nz = params.n_zpf();
  ops.n_squared = -nz * nz * (p * p);

  Eigen::SelfAdjointEigenSolver<RMatrix> es(ops.phi);
  const RVector c = es.eigenvalues().array().cos();
  RMatrix cos_phi = es.eigenvectors() * c.asDiagonal() * es.eigenvectors().transpose();
  ops.cos_phi = 0.5 * (cos_phi + cos_phi.transpose());
  return ops;
}

RMatrix assemble(const CircuitParams& params, const Operators& ops, double phi_ext) {
  const int dim = params.fock_dim;
  const RMatrix shifted = ops.phi + phi_ext * RMatrix::Identity(dim, dim);
  RMatrix h = 4.0 * params.e_c * ops.n_squared + 0.5 * params.e_l * (shifted * shifted) -
              params.e_j * ops.cos_phi;
  return 0.5 * (h + h.transpose());
}

EffectiveQubit diagonalize_at(const CircuitParams& params, double phi_ext, int levels) {
  const Operators ops = circuit_operators(params);
  Eigen::SelfAdjointEigenSolver<RMatrix> es(assemble(params, ops, phi_ext));
  const RVector& e = es.eigenvalues();
  EffectiveQubit q;
  q.delta = e(1) - e(0);
  q.phi_ge = std::abs(es.eigenvectors().col(0).dot(ops.phi * es.eigenvectors().col(1)));
  const int n = std::min<int>(levels, static_cast<int>(e.size()));
  q.spectrum.assign(e.data(), e.data() + n);
  return q;
}

}  // namespace

RMatrix build_circuit_hamiltonian(const CircuitParams& params, double phi_ext) {
  params.validate();
  return assemble(params, circuit_operators(params), phi_ext);
}

EffectiveQubit diagonalize_circuit(const CircuitParams& params, double phi_ext, double rel_tol,
                                   int levels) {
  params.validate();
  EffectiveQubit q = diagonalize_at(params, phi_ext, levels);
  CircuitParams bigger = params;
  bigger.fock_dim += 20;
  const EffectiveQubit check = diagonalize_at(bigger, phi_ext, levels);
  const double change = std::abs(check.delta - q.delta) / std::abs(check.delta);
  if (!(change < rel_tol)) {
    std::ostringstream msg;
    msg << "circuit basis not converged at fock_dim " << params.fock_dim
        << " (relative delta change " << change << ")";
    throw Error(ErrorKind::TruncationTooSmall, msg.str());
  }
  if (!(q.delta > 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "degenerate circuit ground doublet");
  }
  return q;
}

EffectiveCoefficients effective_coefficients(const EffectiveQubit& eq, double e_l,
                                             double phi_dc, double phi_ac) {
  EffectiveCoefficients c;
  c.a_coef = e_l * phi_ac * eq.phi_ge;
  c.b_coef = 2.0 * e_l * (phi_dc - kPi) * eq.phi_ge;
  return c;
}

}  // namespace sweetspot
