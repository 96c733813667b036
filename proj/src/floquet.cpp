#include "sweetspot/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace sweetspot {

cplx DriveSpec::harmonic(int k) const {
  const int n = order();
  if (k > n || k < -n) return {};
  return k >= 0 ? p[static_cast<size_t>(k)] : std::conj(p[static_cast<size_t>(-k)]);
}

double DriveSpec::value(double t) const {
  double v = p.empty() ? 0.0 : p[0].real();
  for (int k = 1; k <= order(); ++k) {
    v += 2.0 * (p[static_cast<size_t>(k)] * std::exp(kI * (k * omega_d * t))).real();
  }
  return v;
}

void DriveSpec::validate() const {
  if (p.empty()) throw Error(ErrorKind::InvalidParameter, "drive needs at least p_0");
  if (!(omega_d > 0.0)) throw Error(ErrorKind::InvalidParameter, "omega_d must be positive");
  if (p[0].imag() != 0.0 || p[0].real() < 0.0 || p[0].real() > 1.0) {
    throw Error(ErrorKind::InvalidParameter, "p_0 must be real and in [0, 1]");
  }
  for (size_t k = 1; k < p.size(); ++k) {
    if (std::abs(p[k].real()) > 1.0 || std::abs(p[k].imag()) > 1.0) {
      throw Error(ErrorKind::InvalidParameter, "Re/Im p_k must lie in [-1, 1]");
    }
  }
}

Vec2 FloquetSolution::mode_plus_at(double t) const {
  Vec2 v = Vec2::Zero();
  for (int k = -k_max; k <= k_max; ++k) v += plus(k) * std::exp(kI * (k * omega_d * t));
  return v;
}

Vec2 FloquetSolution::mode_minus_at(double t) const {
  Vec2 v = Vec2::Zero();
  for (int k = -k_max; k <= k_max; ++k) v += minus(k) * std::exp(kI * (k * omega_d * t));
  return v;
}

double FloquetSolution::harmonic_norm_plus() const {
  double s = 0.0;
  for (const auto& h : harmonics_plus) s += h.squaredNorm();
  return s;
}

double FloquetSolution::harmonic_norm_minus() const {
  double s = 0.0;
  for (const auto& h : harmonics_minus) s += h.squaredNorm();
  return s;
}

double FilterWeights::parseval_sum() const {
  double s = 0.0;
  for (size_t i = 0; i < g_z.size(); ++i) {
    s += 0.5 * std::norm(g_plus[i]) + 0.5 * std::norm(g_minus[i]) + std::norm(g_z[i]);
  }
  return s;
}

double FilterWeights::plus_weight() const {
  return std::accumulate(g_plus.begin(), g_plus.end(), 0.0,
                         [](double s, cplx g) { return s + std::norm(g); });
}

double FilterWeights::z_weight() const {
  return std::accumulate(g_z.begin(), g_z.end(), 0.0,
                         [](double s, cplx g) { return s + std::norm(g); });
}

Mat2 qubit_hamiltonian(const DriveSpec& drive, const EffectiveCoefficients& coeffs, double delta,
                       double t) {
  return 0.5 * delta * pauli_x() +
         (0.5 * coeffs.b_coef + coeffs.a_coef * drive.value(t)) * pauli_z();
}

CMatrix assemble_floquet_matrix(const DriveSpec& drive, const EffectiveCoefficients& coeffs,
                                double delta, int k_max) {
  const int n = drive.order();
  if (k_max < n) {
    std::ostringstream msg;
    msg << "k_max " << k_max << " below drive order " << n;
    throw Error(ErrorKind::HarmonicTruncation, msg.str());
  }
  const int blocks = 2 * k_max + 1;
  CMatrix h = CMatrix::Zero(2 * blocks, 2 * blocks);
  const Mat2 static_part = 0.5 * delta * pauli_x() +
                           (0.5 * coeffs.b_coef + drive.p[0].real() * coeffs.a_coef) * pauli_z();
  const Mat2 sz = pauli_z();
  for (int row = 0; row < blocks; ++row) {
    const int m = row - k_max;
    h.block<2, 2>(2 * row, 2 * row) = static_part + (m * drive.omega_d) * Mat2::Identity();
    for (int col = 0; col < blocks; ++col) {
      const int offset = row - col;
      if (offset == 0 || std::abs(offset) > n) continue;
      h.block<2, 2>(2 * row, 2 * col) = coeffs.a_coef * drive.harmonic(offset) * sz;
    }
  }
  return h;
}

namespace {

// Rotate so the dominant entry of the k = 0 block is real and non-negative.
void fix_gauge(std::vector<Vec2>& harmonics, int k_max) {
  const Vec2& h0 = harmonics[static_cast<size_t>(k_max)];
  const int idx = std::abs(h0(0)) >= std::abs(h0(1)) ? 0 : 1;
  const double mag = std::abs(h0(idx));
  if (mag == 0.0) return;
  const cplx phase = std::conj(h0(idx)) / mag;
  for (auto& h : harmonics) h *= phase;
}

Vec2 normalized_sum(const std::vector<Vec2>& harmonics) {
  Vec2 v = Vec2::Zero();
  for (const auto& h : harmonics) v += h;
  const double nrm = v.norm();
  return nrm > 0.0 ? Vec2(v / nrm) : v;
}

double fold_gap(double gap, double omega_d) {
  double g = std::fmod(gap, omega_d);
  if (g < 0.0) g += omega_d;
  return g;
}

}  // namespace

FloquetSolution solve_floquet(const CMatrix& matrix, double omega_d) {
  const auto dim = matrix.rows();
  if (dim < 2 || dim % 2 != 0 || ((dim / 2) % 2) != 1) {
    throw Error(ErrorKind::DimensionMismatch, "Floquet matrix must be 2(2k_max+1) square");
  }
  const int blocks = static_cast<int>(dim / 2);
  const int k_max = (blocks - 1) / 2;

  Eigen::SelfAdjointEigenSolver<CMatrix> es(matrix);
  const RVector& ev = es.eigenvalues();
  std::vector<int> order(static_cast<size_t>(dim));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return std::abs(ev(a)) < std::abs(ev(b)); });
  int lo = order[0];
  int hi = order[1];
  if (ev(lo) > ev(hi)) std::swap(lo, hi);

  FloquetSolution sol;
  sol.omega_d = omega_d;
  sol.k_max = k_max;
  sol.eps_plus = ev(hi);
  sol.eps_minus = ev(lo);
  if (std::abs(sol.eps_plus - sol.eps_minus) < 1e-12 * omega_d) {
    throw Error(ErrorKind::DegenerateGap, "quasienergies are degenerate");
  }
  sol.omega_gap = fold_gap(sol.eps_plus - sol.eps_minus, omega_d);
  if (!(sol.omega_gap > 0.0)) {
    throw Error(ErrorKind::DegenerateGap, "quasienergy gap folds onto zero");
  }

  sol.harmonics_plus.resize(static_cast<size_t>(blocks));
  sol.harmonics_minus.resize(static_cast<size_t>(blocks));
  for (int b = 0; b < blocks; ++b) {
    sol.harmonics_plus[static_cast<size_t>(b)] = es.eigenvectors().col(hi).segment<2>(2 * b);
    sol.harmonics_minus[static_cast<size_t>(b)] = es.eigenvectors().col(lo).segment<2>(2 * b);
  }
  fix_gauge(sol.harmonics_plus, k_max);
  fix_gauge(sol.harmonics_minus, k_max);
  sol.initial_plus = normalized_sum(sol.harmonics_plus);
  sol.initial_minus = normalized_sum(sol.harmonics_minus);
  return sol;
}

FloquetSolution solve_drive(const DriveSpec& drive, const EffectiveCoefficients& coeffs,
                            double delta, int k_max) {
  const int k = k_max > 0 ? k_max : default_k_max(drive.order());
  return solve_floquet(assemble_floquet_matrix(drive, coeffs, delta, k), drive.omega_d);
}

// Fourth-order Magnus step over [t, t + h] using two Gauss-Legendre nodes.
Mat2 magnus4_step(const DriveSpec& drive, const EffectiveCoefficients& coeffs, double delta,
                  double t, double h) {
  static const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
  static const double c2 = 0.5 + std::sqrt(3.0) / 6.0;
  const Mat2 h1 = qubit_hamiltonian(drive, coeffs, delta, t + c1 * h);
  const Mat2 h2 = qubit_hamiltonian(drive, coeffs, delta, t + c2 * h);
  // Omega = -i h (H1+H2)/2 - (sqrt3/12) h^2 [H2, H1] = -i h Heff.
  const Mat2 comm = h2 * h1 - h1 * h2;
  const Mat2 heff = 0.5 * (h1 + h2) - kI * (std::sqrt(3.0) / 12.0) * h * comm;
  return expm_hermitian2(0.5 * (heff + heff.adjoint()), h);
}

namespace {

struct PeriodPropagation {
  std::vector<Mat2> samples;  // U(t_j), j = 0..steps-1
  Mat2 full;                  // U(T)
};

PeriodPropagation propagate_period(const DriveSpec& drive, const EffectiveCoefficients& coeffs,
                                   double delta, int steps) {
  const double h = drive.period() / steps;
  PeriodPropagation out;
  out.samples.reserve(static_cast<size_t>(steps));
  Mat2 u = Mat2::Identity();
  for (int j = 0; j < steps; ++j) {
    out.samples.push_back(u);
    u = magnus4_step(drive, coeffs, delta, j * h, h) * u;
  }
  out.full = u;
  return out;
}

struct Eigenphases {
  double eps_plus;
  double eps_minus;
  Vec2 vec_plus;
  Vec2 vec_minus;
};

Eigenphases floquet_eigenphases(const Mat2& u, double period) {
  Eigen::ComplexEigenSolver<Mat2> es(u);
  double eps[2];
  Vec2 vecs[2];
  for (int i = 0; i < 2; ++i) {
    // u v = e^{-i eps T} v, eps in (-omega/2, omega/2]
    eps[i] = -std::arg(es.eigenvalues()(i)) / period;
    if (eps[i] <= -kPi / period) eps[i] += kTwoPi / period;
    vecs[i] = es.eigenvectors().col(i).normalized();
  }
  const int hi = eps[0] >= eps[1] ? 0 : 1;
  const int lo = 1 - hi;
  // Orthogonalize the minus branch against the plus branch (unitary eigenvectors).
  Vec2 vm = vecs[lo] - vecs[hi].dot(vecs[lo]) * vecs[hi];
  return {eps[hi], eps[lo], vecs[hi], vm.normalized()};
}

}  // namespace

FloquetSolution reference_floquet_via_propagator(const DriveSpec& drive,
                                                 const EffectiveCoefficients& coeffs,
                                                 double delta, int substeps, int k_max) {
  if (substeps < 1000) {
    throw Error(ErrorKind::InvalidParameter, "propagator reference needs >= 1000 substeps");
  }
  if (!(drive.omega_d > 0.0)) throw Error(ErrorKind::InvalidParameter, "omega_d must be positive");
  const int kmax = k_max > 0 ? k_max : default_k_max(drive.order());
  const double period = drive.period();

  int steps = substeps;
  PeriodPropagation coarse = propagate_period(drive, coeffs, delta, steps);
  Eigenphases phases = floquet_eigenphases(coarse.full, period);
  PeriodPropagation fine;
  bool converged = false;
  for (int attempt = 0; attempt < 8; ++attempt) {
    fine = propagate_period(drive, coeffs, delta, 2 * steps);
    const Eigenphases refined = floquet_eigenphases(fine.full, period);
    const double change = std::max(std::abs(refined.eps_plus - phases.eps_plus),
                                   std::abs(refined.eps_minus - phases.eps_minus));
    phases = refined;
    steps *= 2;
    if (change < 1e-9) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw Error(ErrorKind::Integration, "propagator quasienergies did not converge");
  }

  FloquetSolution sol;
  sol.omega_d = drive.omega_d;
  sol.k_max = kmax;
  sol.eps_plus = phases.eps_plus;
  sol.eps_minus = phases.eps_minus;
  if (std::abs(sol.eps_plus - sol.eps_minus) < 1e-12 * drive.omega_d) {
    throw Error(ErrorKind::DegenerateGap, "quasienergies are degenerate");
  }
  sol.omega_gap = fold_gap(sol.eps_plus - sol.eps_minus, drive.omega_d);

  // |w(t)> = e^{i eps t} U(t) |w(0)>, harmonics by DFT over the period.
  const int m = static_cast<int>(fine.samples.size());
  const double h = period / m;
  sol.harmonics_plus.assign(static_cast<size_t>(2 * kmax + 1), Vec2::Zero());
  sol.harmonics_minus.assign(static_cast<size_t>(2 * kmax + 1), Vec2::Zero());
  for (int j = 0; j < m; ++j) {
    const double t = j * h;
    const Vec2 wp = std::exp(kI * (sol.eps_plus * t)) * (fine.samples[j] * phases.vec_plus);
    const Vec2 wm = std::exp(kI * (sol.eps_minus * t)) * (fine.samples[j] * phases.vec_minus);
    for (int k = -kmax; k <= kmax; ++k) {
      const cplx w = std::exp(-kI * (k * drive.omega_d * t)) / static_cast<double>(m);
      sol.harmonics_plus[static_cast<size_t>(k + kmax)] += w * wp;
      sol.harmonics_minus[static_cast<size_t>(k + kmax)] += w * wm;
    }
  }
  const double np = std::sqrt(sol.harmonic_norm_plus());
  const double nm = std::sqrt(sol.harmonic_norm_minus());
  for (auto& v : sol.harmonics_plus) v /= np;
  for (auto& v : sol.harmonics_minus) v /= nm;
  fix_gauge(sol.harmonics_plus, kmax);
  fix_gauge(sol.harmonics_minus, kmax);
  sol.initial_plus = phases.vec_plus;
  sol.initial_minus = phases.vec_minus;
  return sol;
}

double mode_infidelity(const FloquetSolution& a, const FloquetSolution& b) {
  auto same_class = [&](double x, double y) {
    const double w = a.omega_d;
    const double d = std::remainder(x - y, w);
    return std::abs(d);
  };
  const Vec2& target =
      same_class(a.eps_plus, b.eps_plus) <= same_class(a.eps_plus, b.eps_minus) ? b.initial_plus
                                                                                : b.initial_minus;
  return std::max(0.0, 1.0 - std::abs(a.initial_plus.dot(target)));
}

FilterWeights compute_filter_weights(const FloquetSolution& sol) {
  const int kmax = sol.k_max;
  const int gmax = 2 * kmax;
  FilterWeights w;
  w.k_max = gmax;
  const auto size = static_cast<size_t>(2 * gmax + 1);
  w.g_z.assign(size, cplx{});
  w.g_plus.assign(size, cplx{});
  w.g_minus.assign(size, cplx{});

  // sigma_z v for every harmonic, once.
  auto apply_sz = [](const Vec2& v) { return Vec2(v(0), -v(1)); };
  std::vector<Vec2> sz_plus(sol.harmonics_plus.size());
  std::vector<Vec2> sz_minus(sol.harmonics_minus.size());
  for (size_t i = 0; i < sz_plus.size(); ++i) {
    sz_plus[i] = apply_sz(sol.harmonics_plus[i]);
    sz_minus[i] = apply_sz(sol.harmonics_minus[i]);
  }

  // g^[k] = (1/b) sum_m <a^[m]| sigma_z |b^[m-k]>
  for (int k = -gmax; k <= gmax; ++k) {
    cplx zz{};
    cplx pm{};
    cplx mp{};
    for (int m = -kmax; m <= kmax; ++m) {
      const int l = m - k;
      if (l < -kmax || l > kmax) continue;
      const auto im = static_cast<size_t>(m + kmax);
      const auto il = static_cast<size_t>(l + kmax);
      zz += sol.harmonics_plus[im].dot(sz_plus[il]) - sol.harmonics_minus[im].dot(sz_minus[il]);
      pm += sol.harmonics_plus[im].dot(sz_minus[il]);
      mp += sol.harmonics_minus[im].dot(sz_plus[il]);
    }
    const auto idx = static_cast<size_t>(k + gmax);
    w.g_z[idx] = zz / FilterWeights::b_z;
    w.g_plus[idx] = pm / FilterWeights::b_pm;
    w.g_minus[idx] = mp / FilterWeights::b_pm;
  }
  return w;
}

}  // namespace sweetspot
