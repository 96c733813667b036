#include "sweetspot/core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include <Eigen/Eigenvalues>

namespace sweetspot {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::TruncationTooSmall: return "truncation-too-small";
    case ErrorKind::HarmonicTruncation: return "harmonic-truncation";
    case ErrorKind::DegenerateGap: return "degenerate-gap";
    case ErrorKind::Integration: return "integration";
    case ErrorKind::StencilCrossing: return "stencil-crossing";
    case ErrorKind::TomographyConsistency: return "tomography-consistency";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::EmptyInput: return "empty-input";
    case ErrorKind::Config: return "config";
    case ErrorKind::Dependency: return "dependency";
  }
  return "unknown";
}

Mat2 pauli_i() { return Mat2::Identity(); }

Mat2 pauli_x() {
  Mat2 m;
  m << 0, 1, 1, 0;
  return m;
}

Mat2 pauli_y() {
  Mat2 m;
  m << 0, -kI, kI, 0;
  return m;
}

Mat2 pauli_z() {
  Mat2 m;
  m << 1, 0, 0, -1;
  return m;
}

Mat2 lowering_energy_basis() {
  Mat2 m;
  m << 0.5, 0.5, -0.5, -0.5;
  return m;
}

Mat2 expm_hermitian2(const Mat2& h, double t) {
  // h = a0 I + a.sigma
  const double a0 = 0.5 * (h(0, 0) + h(1, 1)).real();
  const double az = 0.5 * (h(0, 0) - h(1, 1)).real();
  const double ax = h(1, 0).real();
  const double ay = h(1, 0).imag();
  const double r = std::sqrt(ax * ax + ay * ay + az * az);
  const double c = std::cos(r * t);
  // sin(r t)/r, finite at r -> 0
  const double s = r * t > 1e-8 ? std::sin(r * t) / r : t * (1.0 - r * r * t * t / 6.0);
  Mat2 u;
  u(0, 0) = cplx(c, -s * az);
  u(1, 1) = cplx(c, s * az);
  u(0, 1) = -kI * s * cplx(ax, -ay);
  u(1, 0) = -kI * s * cplx(ax, ay);
  return std::exp(-kI * a0 * t) * u;
}

CMatrix expm_hermitian(const CMatrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const CVector phases = (-kI * t * es.eigenvalues().cast<cplx>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace sweetspot
