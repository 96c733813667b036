#include "sweetspot/dss.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace sweetspot {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double distance_to_nearest_integer(double x) { return std::abs(x - std::round(x)); }

double t1_upper_bound_general(const FilterWeights& weights, double omega_gap, double omega_d,
                              const NoiseModel& noise) {
  const double frac = distance_to_nearest_integer(omega_gap / omega_d);
  const double gp = weights.plus_weight();
  const double den = 2.0 * noise.a_f * std::sqrt(noise.a_d * omega_d) * std::sqrt(frac) * gp;
  if (!(den > 0.0)) return kInf;
  return std::sqrt(kPi) / den;
}

double t1_upper_bound_dss(double delta, double omega_gap, double omega_d, const NoiseModel& noise) {
  const double frac = distance_to_nearest_integer(omega_gap / omega_d);
  const double scale = kPi * kPi * delta * delta;
  double res = std::abs(3.0 * omega_d * omega_d - scale);
  if (res <= 1e-12 * scale) res = 0.0;
  const double den = 2.0 * noise.a_f * std::sqrt(noise.a_d * omega_d) * std::sqrt(frac) * res;
  if (!(den > 0.0)) return kInf;
  return 3.0 * std::sqrt(kPi) * omega_d * omega_d / den;
}

BoundReport bound_report(const FilterWeights& weights, double omega_gap, double omega_d,
                         double delta, const RateReport& rates, const NoiseModel& noise) {
  BoundReport b;
  b.t_ub_general = t1_upper_bound_general(weights, omega_gap, omega_d, noise);
  b.t_ub_dss = t1_upper_bound_dss(delta, omega_gap, omega_d, noise);
  b.t1 = rates.t1;
  b.margin_general = b.t_ub_general / b.t1;
  b.margin_dss = b.t_ub_dss / b.t1;
  return b;
}

namespace {

struct TrackedGap {
  CVector vec_plus;
  CVector vec_minus;
  double eps_plus;
  double eps_minus;
};

TrackedGap reference_pair(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const auto& ev = es.eigenvalues();
  int a = 0, b = 1;
  if (std::abs(ev(b)) < std::abs(ev(a))) std::swap(a, b);
  for (int i = 2; i < ev.size(); ++i) {
    if (std::abs(ev(i)) < std::abs(ev(a))) {
      b = a;
      a = i;
    } else if (std::abs(ev(i)) < std::abs(ev(b))) {
      b = i;
    }
  }
  if (ev(a) > ev(b)) std::swap(a, b);
  return {es.eigenvectors().col(b), es.eigenvectors().col(a), ev(b), ev(a)};
}

// Eigenvalue of `h` continuously connected to the reference branch.
double follow(const Eigen::SelfAdjointEigenSolver<CMatrix>& es, const CVector& ref, double eps_ref,
              double max_shift) {
  int best = 0;
  double overlap = -1.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double o = std::abs(ref.dot(es.eigenvectors().col(i)));
    if (o > overlap) {
      overlap = o;
      best = i;
    }
  }
  const double e = es.eigenvalues()(best);
  if (overlap < 0.9 || std::abs(e - eps_ref) > max_shift) {
    throw Error(ErrorKind::StencilCrossing, "quasienergy branch lost across the stencil");
  }
  return e;
}

double tracked_gap(const DriveSpec& drive, EffectiveCoefficients c, double delta, int k_max,
                   SensitivityAxis which, double shift, const TrackedGap& ref, double max_shift) {
  (which == SensitivityAxis::dc ? c.b_coef : c.a_coef) += shift;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(assemble_floquet_matrix(drive, c, delta, k_max));
  return follow(es, ref.vec_plus, ref.eps_plus, max_shift) -
         follow(es, ref.vec_minus, ref.eps_minus, max_shift);
}

}  // namespace

FdEstimate quasienergy_sensitivity_fd(const DriveSpec& drive, const EffectiveCoefficients& coeffs,
                                      double delta, SensitivityAxis which, double step,
                                      int k_max) {
  const double h = step > 0.0 ? step : 1e-5 * delta;
  const int k = k_max > 0 ? k_max : default_k_max(drive.order());
  const TrackedGap ref = reference_pair(assemble_floquet_matrix(drive, coeffs, delta, k));
  // A shift of h moves a quasienergy by at most |h| * ||sigma_z P|| <= h * (1 + 2 sum|p|).
  double pnorm = 1.0;
  if (which == SensitivityAxis::ac) {
    pnorm = std::abs(drive.p[0]);
    for (int i = 1; i <= drive.order(); ++i) pnorm += 2.0 * std::abs(drive.p[static_cast<size_t>(i)]);
  }
  const double max_shift = 4.0 * h * std::max(pnorm, 1.0) + 1e-9 * drive.omega_d;
  auto central = [&](double s) {
    const double up = tracked_gap(drive, coeffs, delta, k, which, s, ref, max_shift);
    const double dn = tracked_gap(drive, coeffs, delta, k, which, -s, ref, max_shift);
    return (up - dn) / (2.0 * s);
  };
  FdEstimate est;
  est.coarse = central(h);
  est.fine = central(0.5 * h);
  est.value = (4.0 * est.fine - est.coarse) / 3.0;
  const double diff = std::abs(est.coarse - est.fine);
  est.consistent = diff <= 1e-3 * std::abs(est.fine) || diff <= 1e-8;
  return est;
}

double double_dss_sum(const DriveSpec& drive, const FilterWeights& weights) {
  cplx s{};
  for (int k = -drive.order(); k <= drive.order(); ++k) s += drive.harmonic(k) * weights.z(k);
  return s.real();
}

const char* to_string(DssLabel l) {
  switch (l) {
    case DssLabel::plain: return "plain";
    case DssLabel::dss: return "dss";
    case DssLabel::double_dss: return "double_dss";
  }
  return "?";
}

DssLabel classify(double gz0_abs, double double_metric, double dss_threshold,
                  double double_threshold) {
  if (!(gz0_abs < dss_threshold)) return DssLabel::plain;
  return double_metric < double_threshold ? DssLabel::double_dss : DssLabel::dss;
}

ClassifiedFront classify_front(const ParetoFront& front, const EvalContext& ctx,
                               const ClassifyOptions& opts) {
  ClassifiedFront out;
  out.points.resize(front.points.size());
  const EffectiveCoefficients coeffs = ctx.coefficients();
  const double scale_dc = 2.0 * ctx.circuit.e_l * ctx.qubit.phi_ge;
  const double scale_ac = ctx.circuit.e_l * ctx.qubit.phi_ge;
  parallel_for(front.points.size(), opts.threads, [&](std::size_t i) {
    ClassifiedPoint& cp = out.points[i];
    cp.point = front.points[i];
    cp.evaluation = cp.point.cache ? *cp.point.cache : evaluate_individual(cp.point.genome, ctx);
    const Evaluation& ev = cp.evaluation;
    if (!ev.feasible) {
      cp.fd_ok = false;
      return;
    }
    const DriveSpec drive = ctx.drive_for(cp.point.genome);
    SensitivityReport& s = cp.sensitivity;
    s.dss_threshold = opts.dss_threshold;
    s.double_threshold = opts.double_threshold;
    s.gz0_abs = std::abs(ev.weights.z(0));
    s.double_dss_metric = std::abs(double_dss_sum(drive, ev.weights));
    cp.label = classify(s.gz0_abs, s.double_dss_metric, opts.dss_threshold, opts.double_threshold);
    cp.bounds = bound_report(ev.weights, ev.omega_gap, ev.omega_d, ctx.qubit.delta, ev.rates,
                             ctx.noise);
    if (opts.finite_differences) {
      try {
        const auto dc = quasienergy_sensitivity_fd(drive, coeffs, ctx.qubit.delta,
                                                   SensitivityAxis::dc, 0.0, ctx.k_max);
        const auto ac = quasienergy_sensitivity_fd(drive, coeffs, ctx.qubit.delta,
                                                   SensitivityAxis::ac, 0.0, ctx.k_max);
        s.d_omega_d_phi_dc = std::abs(dc.value) * scale_dc;
        s.d_omega_d_phi_ac = std::abs(ac.value) * scale_ac;
        cp.fd_ok = dc.consistent && ac.consistent;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::StencilCrossing) throw;
        cp.fd_ok = false;
      }
    }
  });
  for (const auto& cp : out.points) {
    switch (cp.label) {
      case DssLabel::plain: ++out.count_plain; break;
      case DssLabel::dss: ++out.count_dss; break;
      case DssLabel::double_dss: ++out.count_double; break;
    }
  }
  return out;
}

}  // namespace sweetspot
