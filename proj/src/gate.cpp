#include "sweetspot/gate.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

namespace sweetspot {

void PulseSpec::validate() const {
  if (!(duration > 0.0)) throw Error(ErrorKind::InvalidParameter, "pulse duration must be > 0");
  if (steps < 4) throw Error(ErrorKind::InvalidParameter, "pulse needs at least 4 steps");
  if (!(f_max > 0.0)) throw Error(ErrorKind::InvalidParameter, "f_max must be > 0");
  if (n_freq < 1 || n_freq > steps - 2) {
    throw Error(ErrorKind::InvalidParameter, "n_freq must lie in [1, steps - 2]");
  }
  if (design_points < 2 * n_freq + 2) {
    throw Error(ErrorKind::InvalidParameter, "design_points must be >= 2 n_freq + 2");
  }
  if (s_amp < 0.0 || s_amp > f_max) throw Error(ErrorKind::InvalidParameter, "s_amp must be <= f_max");
  if (s_slope < 0.0 || gibbs_tol < 0.0) {
    throw Error(ErrorKind::InvalidParameter, "s_slope and gibbs_tol must be >= 0");
  }
}

double Waveform::operator()(double t) const {
  double v = 0.0;
  for (size_t n = 0; n < coeffs.size(); ++n) {
    v += coeffs[n] * std::sin(static_cast<double>(n + 1) * kPi * t / duration);
  }
  return v;
}

std::vector<double> Waveform::midpoints(int steps) const {
  std::vector<double> f(static_cast<size_t>(steps));
  const double h = duration / steps;
  for (int k = 0; k < steps; ++k) f[static_cast<size_t>(k)] = (*this)((k + 0.5) * h);
  return f;
}

std::vector<double> Waveform::grid(int samples) const {
  std::vector<double> f(static_cast<size_t>(samples), 0.0);
  for (int j = 1; j + 1 < samples; ++j) {
    f[static_cast<size_t>(j)] = (*this)(duration * j / (samples - 1));
  }
  return f;
}

namespace {

// sin(n pi j / M) for j = 0..M, n = 1..nc; row j.
RMatrix sine_table(int m, int nc) {
  RMatrix s(m + 1, nc);
  for (int j = 0; j <= m; ++j) {
    for (int n = 1; n <= nc; ++n) s(j, n - 1) = (j == 0 || j == m) ? 0.0 : std::sin(n * kPi * j / m);
  }
  return s;
}

struct ShapeTrace {
  RMatrix table;
  RVector w;       // windowed raw waveform
  RVector c;       // band-limited coefficients before the guard
  RVector f;       // design-grid samples before the guard
  int argmax = 0;
  double peak = 0.0;
  bool guarded = false;
};

ShapeTrace trace_shape(const std::vector<double>& theta, const PulseSpec& spec) {
  spec.validate();
  if (static_cast<int>(theta.size()) != spec.n_freq) {
    throw Error(ErrorKind::DimensionMismatch, "theta length must equal n_freq");
  }
  const int m = spec.design_points;
  ShapeTrace tr;
  tr.table = sine_table(m, spec.n_freq);
  const RVector th = Eigen::Map<const RVector>(theta.data(), static_cast<long>(theta.size()));
  const RVector x = tr.table * th;
  tr.w.resize(m + 1);
  RVector y(m + 1);
  const double a = spec.amp();
  const double k = spec.slope();
  for (int j = 0; j <= m; ++j) {
    const double s = std::sin(kPi * j / m);
    tr.w(j) = s * s * x(j);
    y(j) = a * (2.0 / (1.0 + std::exp(-k * tr.w(j))) - 1.0);
  }
  y(0) = 0.0;
  y(m) = 0.0;
  tr.c = (2.0 / m) * (tr.table.transpose() * y);
  tr.f = tr.table * tr.c;
  tr.f.cwiseAbs().maxCoeff(&tr.argmax);
  tr.peak = std::abs(tr.f(tr.argmax));
  tr.guarded = tr.peak > spec.f_max * (1.0 + spec.gibbs_tol);
  return tr;
}

}  // namespace

ShapedPulse shape_pulse(const std::vector<double>& theta, const PulseSpec& spec) {
  const ShapeTrace tr = trace_shape(theta, spec);
  ShapedPulse out;
  out.peak = tr.peak;
  out.guarded = tr.guarded;
  const double scale = tr.guarded ? spec.f_max / tr.peak : 1.0;
  out.waveform.duration = spec.duration;
  out.waveform.coeffs.resize(static_cast<size_t>(spec.n_freq));
  for (int n = 0; n < spec.n_freq; ++n) out.waveform.coeffs[static_cast<size_t>(n)] = scale * tr.c(n);
  out.samples = out.waveform.grid(spec.steps);
  return out;
}

std::vector<double> shape_pulse_vjp(const std::vector<double>& theta, const PulseSpec& spec,
                                    const std::vector<double>& grad_coeffs) {
  const ShapeTrace tr = trace_shape(theta, spec);
  const int m = spec.design_points;
  RVector g = Eigen::Map<const RVector>(grad_coeffs.data(), static_cast<long>(grad_coeffs.size()));
  if (tr.guarded) {
    // c' = c f_max / P(c), P = sign(f_*) sum_n c_n S(j*, n)
    const double sgn = tr.f(tr.argmax) >= 0.0 ? 1.0 : -1.0;
    const RVector dp = sgn * tr.table.row(tr.argmax).transpose();
    const double p = tr.peak;
    g = (spec.f_max / p) * g - (spec.f_max / (p * p)) * g.dot(tr.c) * dp;
  }
  RVector gy = (2.0 / m) * (tr.table * g);
  const double a = spec.amp();
  const double k = spec.slope();
  RVector gx(m + 1);
  for (int j = 0; j <= m; ++j) {
    const double sig = 1.0 / (1.0 + std::exp(-k * tr.w(j)));
    const double s = std::sin(kPi * j / m);
    const double inner = (j == 0 || j == m) ? 0.0 : 2.0 * a * k * sig * (1.0 - sig);
    gx(j) = gy(j) * inner * s * s;
  }
  const RVector gt = tr.table.transpose() * gx;
  return {gt.data(), gt.data() + gt.size()};
}

// ---- frame ----------------------------------------------------------------

CMatrix ControlContext::embed(const Mat2& op, int q) const {
  if (n_qubits() == 1) return op;
  const Mat2 id = Mat2::Identity();
  return q == 0 ? CMatrix(Eigen::kroneckerProduct(op, id)) : CMatrix(Eigen::kroneckerProduct(id, op));
}

CMatrix ControlContext::control_operator(int i, int q) const {
  return embed(qubits[static_cast<size_t>(q)].sy[static_cast<size_t>(i)], q);
}

CMatrix ControlContext::hamiltonian(int i, const std::vector<double>& f) const {
  CMatrix h = CMatrix::Zero(dimension, dimension);
  for (int q = 0; q < n_qubits(); ++q) h += f[static_cast<size_t>(q)] * control_operator(i, q);
  if (n_qubits() == 2) {
    const auto idx = static_cast<size_t>(i);
    h += coupling_j * CMatrix(Eigen::kroneckerProduct(qubits[0].sz[idx], qubits[1].sz[idx]));
  }
  return h;
}

namespace {

std::vector<Mat2> frame_unitaries(const DriveSpec& drive, const EffectiveCoefficients& coeffs,
                                  double delta, double duration_ns, int steps, int substeps) {
  const int samples = 2 * steps + 1;
  const double half_us = 1e-3 * duration_ns / (2.0 * steps);
  const double h = half_us / substeps;
  std::vector<Mat2> u(static_cast<size_t>(samples));
  Mat2 cur = Mat2::Identity();
  u[0] = cur;
  for (int i = 1; i < samples; ++i) {
    const double t0 = (i - 1) * half_us;
    for (int s = 0; s < substeps; ++s) cur = magnus4_step(drive, coeffs, delta, t0 + s * h, h) * cur;
    u[static_cast<size_t>(i)] = cur;
  }
  return u;
}

}  // namespace

ControlContext rotating_frame_trajectory(const DriveSpec& drive,
                                         const EffectiveCoefficients& coeffs, double delta,
                                         double duration_ns, int steps, int substeps,
                                         int n_qubits, double coupling_j) {
  if (!(duration_ns > 0.0) || steps < 1 || substeps < 1) {
    throw Error(ErrorKind::InvalidParameter, "frame needs duration > 0, steps >= 1, substeps >= 1");
  }
  if (n_qubits != 1 && n_qubits != 2) throw Error(ErrorKind::InvalidParameter, "1 or 2 qubits");
  int sub = substeps;
  std::vector<Mat2> u = frame_unitaries(drive, coeffs, delta, duration_ns, steps, sub);
  bool converged = false;
  for (int attempt = 0; attempt < 8; ++attempt) {
    std::vector<Mat2> fine = frame_unitaries(drive, coeffs, delta, duration_ns, steps, 2 * sub);
    double change = 0.0;
    for (size_t i = 0; i < u.size(); ++i) change = std::max(change, (fine[i] - u[i]).cwiseAbs().maxCoeff());
    u = std::move(fine);
    sub *= 2;
    if (change < 1e-9) {
      converged = true;
      break;
    }
  }
  if (!converged) throw Error(ErrorKind::Integration, "rotating frame did not converge");

  QubitFrame frame;
  const Mat2 sy = pauli_y(), sz = pauli_z(), sm = lowering_energy_basis();
  frame.sy.reserve(u.size());
  frame.sz.reserve(u.size());
  frame.sm.reserve(u.size());
  for (const Mat2& v : u) {
    frame.sy.push_back(v.adjoint() * sy * v);
    frame.sz.push_back(v.adjoint() * sz * v);
    frame.sm.push_back(v.adjoint() * sm * v);
  }
  ControlContext ctx;
  ctx.dimension = n_qubits == 1 ? 2 : 4;
  ctx.steps = steps;
  ctx.duration = duration_ns;
  ctx.coupling_j = coupling_j;
  ctx.substeps = sub;
  ctx.qubits.assign(static_cast<size_t>(n_qubits), frame);
  return ctx;
}

// ---- targets / propagation -------------------------------------------------

GateTarget GateTarget::identity(int d) { return {CMatrix::Identity(d, d), "I"}; }
GateTarget GateTarget::x() { return {pauli_x(), "X"}; }
GateTarget GateTarget::y() { return {pauli_y(), "Y"}; }

GateTarget GateTarget::sqrt_iswap() {
  CMatrix u = CMatrix::Identity(4, 4);
  const double r = 1.0 / std::sqrt(2.0);
  u(1, 1) = r;
  u(2, 2) = r;
  u(1, 2) = kI * r;
  u(2, 1) = kI * r;
  return {u, "sqrt_iswap"};
}

GateTarget GateTarget::by_name(const std::string& name) {
  if (name == "X" || name == "x") return x();
  if (name == "Y" || name == "y") return y();
  if (name == "I" || name == "i") return identity(2);
  if (name == "sqrt_iswap") return sqrt_iswap();
  throw Error(ErrorKind::Config, "unknown gate '" + name + "'");
}

void GateTarget::validate() const {
  const auto d = unitary.rows();
  if (unitary.cols() != d) throw Error(ErrorKind::DimensionMismatch, "target must be square");
  if ((unitary.adjoint() * unitary - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error(ErrorKind::InvalidParameter, "target is not unitary");
  }
}

CMatrix propagate_closed(const ControlContext& ctx,
                         const std::vector<std::vector<double>>& waveforms) {
  if (static_cast<int>(waveforms.size()) != ctx.n_qubits()) {
    throw Error(ErrorKind::DimensionMismatch, "one waveform per qubit required");
  }
  for (const auto& w : waveforms) {
    if (static_cast<int>(w.size()) != ctx.steps) {
      throw Error(ErrorKind::DimensionMismatch, "waveform length must equal steps");
    }
  }
  CMatrix u = CMatrix::Identity(ctx.dimension, ctx.dimension);
  std::vector<double> f(waveforms.size());
  for (int k = 0; k < ctx.steps; ++k) {
    for (size_t q = 0; q < f.size(); ++q) f[q] = waveforms[q][static_cast<size_t>(k)];
    u = expm_hermitian(ctx.hamiltonian(2 * k + 1, f), ctx.dt()) * u;
  }
  return u;
}

CMatrix propagate_closed(const ControlContext& ctx, const std::vector<Waveform>& waveforms) {
  std::vector<std::vector<double>> samples;
  for (const auto& w : waveforms) samples.push_back(w.midpoints(ctx.steps));
  return propagate_closed(ctx, samples);
}

double gate_fidelity(const CMatrix& u, const GateTarget& target) {
  if (u.rows() != target.unitary.rows() || u.cols() != target.unitary.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "gate and target dimensions differ");
  }
  const double d = static_cast<double>(u.rows());
  return std::norm((target.unitary.adjoint() * u).trace() / d);
}

std::vector<Waveform> render_controls(const std::vector<double>& theta, const PulseSpec& spec,
                                      int n_qubits) {
  if (static_cast<int>(theta.size()) != spec.n_freq * n_qubits) {
    throw Error(ErrorKind::DimensionMismatch, "theta must hold n_freq values per qubit");
  }
  std::vector<Waveform> out;
  for (int q = 0; q < n_qubits; ++q) {
    std::vector<double> part(theta.begin() + q * spec.n_freq, theta.begin() + (q + 1) * spec.n_freq);
    out.push_back(shape_pulse(part, spec).waveform);
  }
  return out;
}

namespace {

void check_grid(const PulseSpec& spec, const ControlContext& ctx) {
  if (spec.steps != ctx.steps || std::abs(spec.duration - ctx.duration) > 1e-12 * spec.duration) {
    throw Error(ErrorKind::DimensionMismatch, "pulse spec and frame grid differ");
  }
}

}  // namespace

double pulse_fidelity(const std::vector<double>& theta, const PulseSpec& spec,
                      const ControlContext& ctx, const GateTarget& target) {
  check_grid(spec, ctx);
  return gate_fidelity(propagate_closed(ctx, render_controls(theta, spec, ctx.n_qubits())), target);
}

std::vector<double> grape_gradient(const std::vector<double>& theta, const PulseSpec& spec,
                                   const ControlContext& ctx, const GateTarget& target,
                                   double* fidelity) {
  check_grid(spec, ctx);
  const int nq = ctx.n_qubits();
  const int d = ctx.dimension;
  const int steps = ctx.steps;
  const double dt = ctx.dt();
  const auto wf = render_controls(theta, spec, nq);
  std::vector<std::vector<double>> f;
  for (const auto& w : wf) f.push_back(w.midpoints(steps));

  std::vector<CMatrix> vecs(static_cast<size_t>(steps));
  std::vector<RVector> vals(static_cast<size_t>(steps));
  std::vector<CMatrix> fwd(static_cast<size_t>(steps) + 1);
  fwd[0] = CMatrix::Identity(d, d);
  std::vector<double> fk(static_cast<size_t>(nq));
  for (int k = 0; k < steps; ++k) {
    for (int q = 0; q < nq; ++q) fk[static_cast<size_t>(q)] = f[static_cast<size_t>(q)][static_cast<size_t>(k)];
    Eigen::SelfAdjointEigenSolver<CMatrix> es(ctx.hamiltonian(2 * k + 1, fk));
    vecs[static_cast<size_t>(k)] = es.eigenvectors();
    vals[static_cast<size_t>(k)] = es.eigenvalues();
    const CVector ph = (-kI * dt * es.eigenvalues().cast<cplx>()).array().exp();
    const CMatrix uk = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    fwd[static_cast<size_t>(k) + 1] = uk * fwd[static_cast<size_t>(k)];
  }
  const CMatrix ud = target.unitary.adjoint();
  const cplx z = (ud * fwd.back()).trace();
  if (fidelity) *fidelity = std::norm(z) / (static_cast<double>(d) * d);

  std::vector<std::vector<double>> gf(static_cast<size_t>(nq), std::vector<double>(static_cast<size_t>(steps)));
  CMatrix back = ud;  // U_d^dag U_N ... U_{k+1}
  for (int k = steps - 1; k >= 0; --k) {
    const CMatrix& v = vecs[static_cast<size_t>(k)];
    const RVector& lam = vals[static_cast<size_t>(k)];
    CMatrix g(d, d);
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) {
        const double x = 0.5 * (lam(a) - lam(b)) * dt;
        const double sinc = std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
        g(a, b) = -kI * dt * std::exp(-kI * (0.5 * (lam(a) + lam(b)) * dt)) * sinc;
      }
    }
    const CMatrix xk = v.adjoint() * (fwd[static_cast<size_t>(k)] * back) * v;
    for (int q = 0; q < nq; ++q) {
      const CMatrix e = v.adjoint() * ctx.control_operator(2 * k + 1, q) * v;
      cplx dz{};
      for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) dz += xk(b, a) * g(a, b) * e(a, b);
      }
      gf[static_cast<size_t>(q)][static_cast<size_t>(k)] =
          -2.0 * (std::conj(z) * dz).real() / (static_cast<double>(d) * d);
    }
    const CVector ph = (-kI * dt * lam.cast<cplx>()).array().exp();
    back = back * (v * ph.asDiagonal() * v.adjoint());
  }

  std::vector<double> grad;
  grad.reserve(theta.size());
  for (int q = 0; q < nq; ++q) {
    std::vector<double> gc(static_cast<size_t>(spec.n_freq), 0.0);
    for (int k = 0; k < steps; ++k) {
      const double t = (k + 0.5) * dt;
      for (int n = 0; n < spec.n_freq; ++n) {
        gc[static_cast<size_t>(n)] += gf[static_cast<size_t>(q)][static_cast<size_t>(k)] *
                                      std::sin((n + 1) * kPi * t / spec.duration);
      }
    }
    std::vector<double> part(theta.begin() + q * spec.n_freq, theta.begin() + (q + 1) * spec.n_freq);
    const auto gt = shape_pulse_vjp(part, spec, gc);
    grad.insert(grad.end(), gt.begin(), gt.end());
  }
  return grad;
}

namespace {

GrapeResult grape_single(const PulseSpec& spec, const ControlContext& ctx,
                         const GateTarget& target, const GrapeSettings& settings) {
  const size_t dim = static_cast<size_t>(spec.n_freq * ctx.n_qubits());
  GrapeResult res;
  res.theta = settings.initial_theta;
  if (res.theta.empty()) {
    std::mt19937_64 rng(settings.seed);
    std::normal_distribution<double> gauss(0.0, settings.init_scale * spec.f_max);
    res.theta.resize(dim);
    for (auto& t : res.theta) t = gauss(rng);
  }
  if (res.theta.size() != dim) throw Error(ErrorKind::DimensionMismatch, "initial theta size");

  double fid = 0.0;
  std::vector<double> grad = grape_gradient(res.theta, spec, ctx, target, &fid);
  res.history.push_back(fid);
  std::vector<double> m(dim, 0.0), v(dim, 0.0), cand(dim);
  double b1t = 1.0, b2t = 1.0;
  res.message = "iteration limit reached";
  for (int it = 1; it <= settings.max_iterations; ++it) {
    if (1.0 - fid < settings.target_infidelity) {
      res.converged = true;
      res.message = "target reached";
      break;
    }
    b1t *= settings.beta1;
    b2t *= settings.beta2;
    std::vector<double> step(dim);
    for (size_t i = 0; i < dim; ++i) {
      m[i] = settings.beta1 * m[i] + (1.0 - settings.beta1) * grad[i];
      v[i] = settings.beta2 * v[i] + (1.0 - settings.beta2) * grad[i] * grad[i];
      const double mh = m[i] / (1.0 - b1t);
      const double vh = v[i] / (1.0 - b2t);
      step[i] = settings.learning_rate * mh / (std::sqrt(vh) + settings.epsilon);
    }
    bool accepted = false;
    double cand_fid = 0.0;
    auto line_search = [&](const std::vector<double>& dir) {
      double scale = 1.0;
      for (int tries = 0; tries < 30; ++tries) {
        for (size_t i = 0; i < dim; ++i) cand[i] = res.theta[i] - scale * dir[i];
        cand_fid = pulse_fidelity(cand, spec, ctx, target);
        if (cand_fid >= fid) return true;
        scale *= 0.5;
      }
      return false;
    };
    accepted = line_search(step);
    if (!accepted) {
      // Adam direction lost descent; restart the moments from a plain gradient step.
      double gn = 0.0;
      for (double gi : grad) gn += gi * gi;
      gn = std::sqrt(gn);
      if (gn > 0.0) {
        for (size_t i = 0; i < dim; ++i) step[i] = settings.learning_rate * grad[i] / gn;
        accepted = line_search(step);
      }
      std::fill(m.begin(), m.end(), 0.0);
      std::fill(v.begin(), v.end(), 0.0);
      b1t = 1.0;
      b2t = 1.0;
    }
    if (!accepted) {
      res.message = "stagnated below target";
      break;
    }
    res.theta = cand;
    grad = grape_gradient(res.theta, spec, ctx, target, &fid);
    res.history.push_back(fid);
    res.iterations = it;
  }
  if (!res.converged && 1.0 - fid < settings.target_infidelity) {
    res.converged = true;
    res.message = "target reached";
  }
  res.fidelity = fid;
  return res;
}

}  // namespace

GrapeResult optimize_pulse(const PulseSpec& spec, const ControlContext& ctx,
                           const GateTarget& target, const GrapeSettings& settings) {
  target.validate();
  if (settings.restarts < 0) throw Error(ErrorKind::Config, "restarts must be >= 0");
  GrapeResult best = grape_single(spec, ctx, target, settings);
  int total = best.iterations;
  GrapeSettings s = settings;
  for (int r = 0; r < settings.restarts && !best.converged && settings.initial_theta.empty(); ++r) {
    s.seed = settings.seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(r + 1);
    GrapeResult next = grape_single(spec, ctx, target, s);
    total += next.iterations;
    if (next.fidelity > best.fidelity) best = std::move(next);
  }
  best.iterations = total;
  return best;
}

}  // namespace sweetspot
