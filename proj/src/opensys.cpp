#include "sweetspot/opensys.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

namespace sweetspot {

LindbladModel LindbladModel::from_rates(const RateReport& rates, int n_qubits) {
  LindbladModel m;
  m.qubits.assign(static_cast<size_t>(n_qubits), QubitRates{rates.gamma_1, rates.gamma_z});
  return m;
}

void LindbladModel::validate() const {
  for (const auto& q : qubits) {
    if (!(q.gamma_1 >= 0.0) || !(q.gamma_phi >= 0.0)) {
      throw Error(ErrorKind::InvalidParameter, "Lindblad rates must be >= 0");
    }
  }
}

namespace {

struct StepGenerator {
  CMatrix h;
  std::vector<CMatrix> jumps;
  std::vector<double> rates;  // 1/ns
  std::vector<CMatrix> ldl;   // L^dag L
};

CMatrix lindblad_rhs(const StepGenerator& g, const CMatrix& rho) {
  CMatrix out = -kI * (g.h * rho - rho * g.h);
  for (size_t j = 0; j < g.jumps.size(); ++j) {
    if (g.rates[j] == 0.0) continue;
    const CMatrix& l = g.jumps[j];
    out += g.rates[j] * (l * rho * l.adjoint() - 0.5 * (g.ldl[j] * rho + rho * g.ldl[j]));
  }
  return out;
}

CMatrix integrate(const std::vector<StepGenerator>& gens, const CMatrix& rho0, double dt, int sub) {
  CMatrix rho = rho0;
  const double h = dt / sub;
  for (const auto& g : gens) {
    for (int s = 0; s < sub; ++s) {
      const CMatrix k1 = lindblad_rhs(g, rho);
      const CMatrix k2 = lindblad_rhs(g, rho + 0.5 * h * k1);
      const CMatrix k3 = lindblad_rhs(g, rho + 0.5 * h * k2);
      const CMatrix k4 = lindblad_rhs(g, rho + h * k3);
      rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }
  return rho;
}

}  // namespace

CMatrix evolve_density(const ControlContext& ctx, const std::vector<Waveform>& waveforms,
                       const LindbladModel& model, const CMatrix& rho0,
                       const EvolveOptions& opts) {
  model.validate();
  if (static_cast<int>(model.qubits.size()) != ctx.n_qubits() ||
      static_cast<int>(waveforms.size()) != ctx.n_qubits()) {
    throw Error(ErrorKind::DimensionMismatch, "rates and waveforms must match the qubit count");
  }
  if (rho0.rows() != ctx.dimension || rho0.cols() != ctx.dimension) {
    throw Error(ErrorKind::DimensionMismatch, "rho0 dimension differs from the context");
  }
  if (opts.rk_substeps < 1) throw Error(ErrorKind::InvalidParameter, "rk_substeps must be >= 1");

  std::vector<std::vector<double>> f;
  for (const auto& w : waveforms) f.push_back(w.midpoints(ctx.steps));
  std::vector<StepGenerator> gens(static_cast<size_t>(ctx.steps));
  std::vector<double> fk(static_cast<size_t>(ctx.n_qubits()));
  for (int k = 0; k < ctx.steps; ++k) {
    const int i = 2 * k + 1;
    StepGenerator& g = gens[static_cast<size_t>(k)];
    for (int q = 0; q < ctx.n_qubits(); ++q) fk[static_cast<size_t>(q)] = f[static_cast<size_t>(q)][static_cast<size_t>(k)];
    g.h = ctx.hamiltonian(i, fk);
    for (int q = 0; q < ctx.n_qubits(); ++q) {
      const QubitFrame& fr = ctx.qubits[static_cast<size_t>(q)];
      const QubitRates& r = model.qubits[static_cast<size_t>(q)];
      g.jumps.push_back(ctx.embed(fr.sm[static_cast<size_t>(i)], q));
      g.rates.push_back(1e-3 * r.gamma_1);
      g.jumps.push_back(ctx.embed(fr.sz[static_cast<size_t>(i)], q));
      g.rates.push_back(1e-3 * r.gamma_phi);
    }
    for (const auto& l : g.jumps) g.ldl.push_back(l.adjoint() * l);
  }
  const CMatrix rho = integrate(gens, rho0, ctx.dt(), opts.rk_substeps);
  if (opts.refinement_check) {
    const CMatrix fine = integrate(gens, rho0, ctx.dt(), 2 * opts.rk_substeps);
    if ((fine - rho).norm() > opts.refinement_tol) {
      throw Error(ErrorKind::Integration, "Lindblad step refinement changed rho beyond tolerance");
    }
    return fine;
  }
  return rho;
}

// ---- process matrices -------------------------------------------------------

std::vector<CMatrix> pauli_basis(int d) {
  const std::vector<CMatrix> single{pauli_i(), pauli_x(), pauli_y(), pauli_z()};
  std::vector<CMatrix> basis{CMatrix::Identity(1, 1)};
  int dim = 1;
  while (dim < d) {
    std::vector<CMatrix> next;
    for (const auto& b : basis) {
      for (const auto& p : single) next.push_back(Eigen::kroneckerProduct(b, p));
    }
    basis = std::move(next);
    dim *= 2;
  }
  if (dim != d) throw Error(ErrorKind::DimensionMismatch, "dimension must be a power of two");
  return basis;
}

namespace {

CVector pauli_components(const CMatrix& a, const std::vector<CMatrix>& basis) {
  const double d = static_cast<double>(a.rows());
  CVector c(static_cast<long>(basis.size()));
  for (size_t m = 0; m < basis.size(); ++m) c(static_cast<long>(m)) = (basis[m].adjoint() * a).trace() / d;
  return c;
}

}  // namespace

ProcessMatrix chi_from_kraus(const std::vector<CMatrix>& kraus) {
  if (kraus.empty()) throw Error(ErrorKind::EmptyInput, "no Kraus operators");
  ProcessMatrix pm;
  pm.d = static_cast<int>(kraus.front().rows());
  const auto basis = pauli_basis(pm.d);
  pm.chi = CMatrix::Zero(static_cast<long>(basis.size()), static_cast<long>(basis.size()));
  for (const auto& k : kraus) {
    const CVector c = pauli_components(k, basis);
    pm.chi += c * c.adjoint();
  }
  return pm;
}

ProcessMatrix chi_from_unitary(const CMatrix& u) { return chi_from_kraus({u}); }

void ProcessMatrix::validate(double tol) const {
  const long n = static_cast<long>(d) * d;
  if (chi.rows() != n || chi.cols() != n) throw Error(ErrorKind::DimensionMismatch, "chi must be d^2 x d^2");
  if ((chi - chi.adjoint()).cwiseAbs().maxCoeff() > tol) {
    throw Error(ErrorKind::TomographyConsistency, "chi is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (chi + chi.adjoint()), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol) {
    throw Error(ErrorKind::TomographyConsistency, "chi is not positive semidefinite");
  }
}

ProcessMatrix process_tomography(const Channel& channel, int d, int threads) {
  const auto basis = pauli_basis(d);
  // Physical inputs: |i><i|, (|i>+|j>)/sqrt2, (|i>+i|j>)/sqrt2.
  struct Input {
    int i, j, kind;
  };
  std::vector<Input> inputs;
  for (int i = 0; i < d; ++i) inputs.push_back({i, i, 0});
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      inputs.push_back({i, j, 1});
      inputs.push_back({i, j, 2});
    }
  }
  auto state = [d](const Input& in) {
    CVector v = CVector::Zero(d);
    v(in.i) = 1.0;
    if (in.kind == 1) v(in.j) = 1.0;
    if (in.kind == 2) v(in.j) = kI;
    v.normalize();
    return CMatrix(v * v.adjoint());
  };
  std::vector<CMatrix> out(inputs.size());
  parallel_for(inputs.size(), threads, [&](std::size_t n) { out[n] = channel(state(inputs[n])); });

  for (const auto& o : out) {
    if (std::abs(o.trace() - 1.0) > 1e-8) {
      throw Error(ErrorKind::TomographyConsistency, "channel is not trace preserving");
    }
  }
  // Linearity probe on an equal mixture of the first two inputs.
  if (inputs.size() > 1) {
    const CMatrix mix = 0.5 * (state(inputs[0]) + state(inputs[1]));
    if ((channel(mix) - 0.5 * (out[0] + out[1])).norm() > 1e-8) {
      throw Error(ErrorKind::TomographyConsistency, "channel is not linear");
    }
  }

  // eps(E_ij) by linearity.
  std::vector<CMatrix> img(static_cast<size_t>(d * d));
  auto at = [&](int i, int j) -> CMatrix& { return img[static_cast<size_t>(i * d + j)]; };
  for (int i = 0; i < d; ++i) at(i, i) = out[static_cast<size_t>(i)];
  size_t idx = static_cast<size_t>(d);
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      const CMatrix& plus = out[idx++];
      const CMatrix& plus_i = out[idx++];
      const CMatrix diag = at(i, i) + at(j, j);
      at(i, j) = plus + kI * plus_i - 0.5 * (1.0 + kI) * diag;
      at(j, i) = plus - kI * plus_i - 0.5 * (1.0 - kI) * diag;
    }
  }
  // Choi matrix J = sum_ij E_ij (x) eps(E_ij); |A>> has component (i d + j) = A_ji.
  const long n = static_cast<long>(d) * d;
  CMatrix choi = CMatrix::Zero(n, n);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      CMatrix e = CMatrix::Zero(d, d);
      e(i, j) = 1.0;
      choi += Eigen::kroneckerProduct(e, at(i, j));
    }
  }
  auto vec = [d, n](const CMatrix& a) {
    CVector v(n);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) v(i * d + j) = a(j, i);
    }
    return v;
  };
  CMatrix vb(n, n);
  for (size_t m = 0; m < basis.size(); ++m) vb.col(static_cast<long>(m)) = vec(basis[m]);
  ProcessMatrix pm;
  pm.d = d;
  pm.chi = vb.adjoint() * choi * vb / static_cast<double>(n);
  pm.validate(1e-8);
  return pm;
}

double process_fidelity(const ProcessMatrix& chi, const ProcessMatrix& target) {
  if (chi.d != target.d || chi.chi.rows() != target.chi.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "process matrices differ in dimension");
  }
  const double d = chi.d;
  const double overlap = (target.chi * chi.chi).trace().real();
  return (d * overlap + chi.chi.trace().real()) / (d + 1.0);
}

}  // namespace sweetspot
