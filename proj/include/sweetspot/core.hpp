#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sweetspot {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Mat2 = Eigen::Matrix2cd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr cplx kI{0.0, 1.0};

enum class ErrorKind {
  InvalidParameter,
  TruncationTooSmall,   // circuit basis did not converge
  HarmonicTruncation,   // Floquet k_max below drive order
  DegenerateGap,
  Integration,
  StencilCrossing,
  TomographyConsistency,
  DimensionMismatch,
  EmptyInput,
  Config,
  Dependency,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Pauli matrices in the two-level basis of the effective qubit model.
// sigma_x is diagonal in the energy basis, sigma_z is the flux coupling.
Mat2 pauli_i();
Mat2 pauli_x();
Mat2 pauli_y();
Mat2 pauli_z();
// |g><e| with |e> = (1,1)/sqrt2, |g> = (1,-1)/sqrt2, the eigenvectors of sigma_x.
Mat2 lowering_energy_basis();

// exp(-i H t) for a Hermitian 2x2 H in closed form.
Mat2 expm_hermitian2(const Mat2& h, double t);

// exp(-i H t) for a small Hermitian matrix via eigendecomposition.
CMatrix expm_hermitian(const CMatrix& h, double t);

// Runs fn(i) for i in [0, n) on up to `threads` workers (0: hardware concurrency).
// The first exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace sweetspot
