// One line per acceptance criterion; nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>
#include <set>
#include <string>

#include "sweetspot/dss.hpp"
#include "sweetspot/gate.hpp"
#include "sweetspot/opensys.hpp"
#include "sweetspot/pareto.hpp"

using namespace sweetspot;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

char buf[1024];

template <class... Args>
std::string fmt(const char* f, Args... args) {
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool within(double v, double target, double tol) { return std::abs(v - target) <= tol * target; }

const EvalContext& device_context() {
  static const EvalContext ctx = EvalContext::prepare(CircuitParams{}, kPi, 0.004 * kPi);
  return ctx;
}

Genome random_genome(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto lo = Genome::lower_bounds(n);
  const auto hi = Genome::upper_bounds(n);
  std::vector<double> x(lo.size());
  for (size_t i = 0; i < x.size(); ++i) x[i] = lo[i] + (hi[i] - lo[i]) * u(rng);
  return Genome::unflatten(x, n);
}

Genome dss_genome(int which) {
  static const double p0[3] = {0.23, 0.69, 0.37};
  static const double re[3][4] = {{-0.55, 0.96, -0.58, 0.14}, {0.73, 0.97, 0.28, -0.16}, {-0.99, 0.01, -0.99, 0.99}};
  static const double im[3][4] = {{0.21, -0.95, 0.31, -0.85}, {-0.99, -0.88, 0.84, 0.58}, {-1.0, -0.87, 0.99, 1.0}};
  static const double frac[3] = {1.01, 1.13, 0.99};
  Genome g;
  g.p0 = p0[which];
  g.p_re.assign(re[which], re[which] + 4);
  g.p_im.assign(im[which], im[which] + 4);
  g.omega_d_frac = frac[which];
  return g;
}

RateReport static_rates(const EvalContext& ctx) {
  DriveSpec d;
  d.phi_dc = ctx.phi_dc;
  d.omega_d = 1.3 * ctx.qubit.delta;
  const auto sol = solve_drive(d, ctx.coefficients(), ctx.qubit.delta, 3);
  return decoherence_rates(compute_filter_weights(sol), sol.omega_gap, d.omega_d, ctx.noise);
}

Outcome criterion1() {
  const RateReport s = static_rates(EvalContext::prepare(CircuitParams{}, kPi, 0.0));
  const RateReport o = static_rates(EvalContext::prepare(CircuitParams{}, 1.03 * kPi, 0.0));
  const bool ok_static = within(s.t1, 430.0, 0.15) && s.t_phi > 1e4;
  const bool ok_off = within(o.t1, 940.0, 0.15) && within(o.t_phi, 1.0, 0.30);
  return {ok_static && ok_off,
          fmt("static T1=%.2f us Tphi=%g us [%s]; off-sweet-spot T1=%.2f us (want 940+-15%%) "
              "Tphi=%.3f us (want 1+-30%%) [%s]",
              s.t1, s.t_phi, ok_static ? "ok" : "miss", o.t1, o.t_phi, ok_off ? "ok" : "miss")};
}

Outcome criterion2() {
  const double want[3][2] = {{877, 2036}, {711, 3035}, {553, 7398}};
  bool ok = true;
  std::string d;
  for (int i = 0; i < 3; ++i) {
    const Evaluation ev = evaluate_individual(dss_genome(i), device_context());
    const double gz0 = std::abs(ev.weights.z(0));
    const bool good = ev.feasible && within(ev.rates.t1, want[i][0], 0.15) &&
                      within(ev.rates.t_phi, want[i][1], 0.15) && gz0 < kDssThreshold;
    ok = ok && good;
    d += fmt("DSS-%d T1=%.1f Tphi=%.1f |gz0|=%.2e [%s]; ", i + 1, ev.rates.t1, ev.rates.t_phi, gz0,
             good ? "ok" : "miss");
  }
  return {ok, d};
}

Outcome criterion3() {
  const EvalContext& ctx = device_context();
  std::mt19937_64 rng(derive_seed(2024, 3));
  constexpr int kDrives = 20;
  bool ok = true;
  std::string d;
  for (int n = 1; n <= 5; ++n) {
    double worst = 0.0, worst_slope = -1e300;
    int above = 0;
    for (int t = 0; t < kDrives; ++t) {
      const DriveSpec drive = ctx.drive_for(random_genome(rng, n));
      FloquetSolution ref;
      try {
        ref = reference_floquet_via_propagator(drive, ctx.coefficients(), ctx.qubit.delta, 4096);
      } catch (const Error&) {
        --t;
        continue;
      }
      std::vector<double> ks, ls;
      double at3n = 0.0;
      for (int k = n; k <= 3 * n + 3; ++k) {
        const double inf = mode_infidelity(solve_drive(drive, ctx.coefficients(), ctx.qubit.delta, k), ref);
        if (k == 3 * n) at3n = inf;
        ks.push_back(k);
        ls.push_back(std::log10(std::max(inf, 1e-16)));
      }
      // least-squares slope of log10 infidelity against K until the roundoff floor
      size_t m = 0;
      while (m < ls.size() && ls[m] > -15.0) ++m;
      m = std::max<size_t>(m, 2);
      double kb = 0, lb = 0;
      for (size_t i = 0; i < m; ++i) kb += ks[i] / m, lb += ls[i] / m;
      double sxy = 0, sxx = 0;
      for (size_t i = 0; i < m; ++i) sxy += (ks[i] - kb) * (ls[i] - lb), sxx += (ks[i] - kb) * (ks[i] - kb);
      worst_slope = std::max(worst_slope, sxy / sxx);
      worst = std::max(worst, at3n);
      above += at3n > 1e-10;
    }
    ok = ok && above == 0 && worst_slope < 0.0;
    d += fmt("n=%d: worst %.1e at K=%d (%d/%d above 1e-10), slope <= %.2f dec/K; ", n, worst, 3 * n,
             above, kDrives, worst_slope);
  }
  return {ok, d};
}

Outcome criterion4() {
  const EvalContext& ctx = device_context();
  std::mt19937_64 rng(derive_seed(2024, 4));
  double worst_p = 0.0, worst_s = 0.0;
  int done = 0;
  while (done < 1000) {
    const DriveSpec d = ctx.drive_for(random_genome(rng, 1 + done % 5));
    FilterWeights w;
    try {
      w = compute_filter_weights(solve_drive(d, ctx.coefficients(), ctx.qubit.delta));
    } catch (const Error&) {
      continue;
    }
    worst_p = std::max(worst_p, std::abs(w.parseval_sum() - 1.0));
    for (int k = -w.k_max; k <= w.k_max; ++k) {
      worst_s = std::max(worst_s, std::abs(std::abs(w.plus(k)) - std::abs(w.minus(-k))));
    }
    ++done;
  }
  return {worst_p <= 1e-8 && worst_s <= 1e-10,
          fmt("1000 drives: max |Parseval-1| = %.2e, max ||g+[k]|-|g-[-k]|| = %.2e", worst_p, worst_s)};
}

struct FrontData {
  ParetoFront front;
  ClassifiedFront classified;
  double seconds = 0.0;
};

const FrontData& desk_front() {
  static const FrontData data = [] {
    FrontData fd;
    const auto t0 = std::chrono::steady_clock::now();
    const EvalContext& ctx = device_context();
    std::vector<ParetoFront> fronts;
    const Strategy all[4] = {Strategy::nsga2, Strategy::spea2, Strategy::ibea, Strategy::moead};
    for (std::uint64_t i = 0; i < 4; ++i) {
      OptimizerConfig cfg;
      cfg.population_m = 32;
      cfg.generations_n = 200;
      cfg.strategy = all[i];
      cfg.seed = derive_seed(20240611, i, 0);
      fronts.push_back(run_stage1(cfg, ctx));
    }
    fd.front = aggregate_fronts(fronts);
    fd.classified = classify_front(fd.front, ctx);
    fd.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return fd;
  }();
  return data;
}

Outcome criterion5() {
  const EvalContext& ctx = device_context();
  std::mt19937_64 rng(derive_seed(2024, 5));
  int random_viol = 0, done = 0;
  while (done < 1000) {
    const Evaluation ev = evaluate_individual(random_genome(rng, 1 + done % 5), ctx);
    if (!ev.feasible) continue;
    const BoundReport b = bound_report(ev.weights, ev.omega_gap, ev.omega_d, ctx.qubit.delta, ev.rates, ctx.noise);
    random_viol += b.t1 > b.t_ub_general;
    ++done;
  }
  int front_viol = 0, dss_points = 0, dss_viol = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& p : desk_front().classified.points) {
    front_viol += p.bounds.t1 > p.bounds.t_ub_general;
    if (p.label == DssLabel::plain) continue;
    ++dss_points;
    dss_viol += p.bounds.t1 > p.bounds.t_ub_dss;
    worst_margin = std::min(worst_margin, p.bounds.margin_dss);
  }
  return {random_viol == 0 && front_viol == 0 && dss_viol == 0,
          fmt("general bound: %d/1000 random and %d/%zu front violations; DSS bound: %d/%d DSS points "
              "violate (min T_UB2/T1 = %.3f)",
              random_viol, front_viol, desk_front().classified.points.size(), dss_viol, dss_points,
              worst_margin)};
}

Outcome criterion6() {
  const EvalContext& ctx = device_context();
  const auto c = ctx.coefficients();
  std::mt19937_64 rng(derive_seed(2024, 6));
  int literal_ok = 0, corrected_ok = 0, done = 0;
  std::vector<double> dc_random;
  auto agree = [](double a, double b) { return std::abs(a - b) <= std::max(0.05 * std::abs(b), 1e-3); };
  while (done < 200) {
    const DriveSpec d = ctx.drive_for(random_genome(rng, 1 + done % 5));
    FilterWeights w;
    FdEstimate ac, dc;
    try {
      w = compute_filter_weights(solve_drive(d, c, ctx.qubit.delta));
      ac = quasienergy_sensitivity_fd(d, c, ctx.qubit.delta, SensitivityAxis::ac);
      dc = quasienergy_sensitivity_fd(d, c, ctx.qubit.delta, SensitivityAxis::dc);
    } catch (const Error&) {
      continue;
    }
    const double s = double_dss_sum(d, w);
    literal_ok += agree(std::abs(s), std::abs(ac.value));
    corrected_ok += agree(std::abs(2.0 * s), std::abs(ac.value));
    dc_random.push_back(std::abs(dc.value));
    ++done;
  }
  std::sort(dc_random.begin(), dc_random.end());
  const double median = 0.5 * (dc_random[99] + dc_random[100]);
  const double scale = 2.0 * ctx.circuit.e_l * ctx.qubit.phi_ge;
  int dss = 0, below = 0;
  for (const auto& p : desk_front().classified.points) {
    if (p.label == DssLabel::plain) continue;
    ++dss;
    below += p.sensitivity.d_omega_d_phi_dc / scale < median;
  }
  const bool ok = literal_ok == 200 && dss > 0 && below == dss;
  return {ok, fmt("|sum p_k gz[k]| vs FD dOmega/dA: %d/200 agree (with factor 2: %d/200); "
                  "DSS points below random median |dOmega/dB| (%.3g): %d/%d",
                  literal_ok, corrected_ok, median, below, dss)};
}

Outcome criterion7() {
  const FrontData& fd = desk_front();
  const auto& pts = fd.front.points;
  bool mutual = true;
  for (const auto& a : pts)
    for (const auto& b : pts) mutual = mutual && !dominates(a.objectives, b.objectives);
  const RateReport off = static_rates(EvalContext::prepare(CircuitParams{}, 1.03 * kPi, 0.0));
  const Objectives base{off.gamma_1, off.gamma_z};
  bool dominated = false;
  for (const auto& p : pts) dominated = dominated || dominates(p.objectives, base);
  const int dss = fd.classified.count_dss + fd.classified.count_double;
  return {mutual && dominated && dss >= 1,
          fmt("%zu points in %.0f s, mutually non-dominated: %s, dominates off-sweet-spot: %s, DSS-labeled: %d "
              "(double-DSS %d)",
              pts.size(), fd.seconds, mutual ? "yes" : "no", dominated ? "yes" : "no", dss,
              fd.classified.count_double)};
}

Outcome criterion8() {
  std::mt19937_64 rng(derive_seed(2024, 8));
  std::uniform_int_distribution<int> grid(1, 12);
  int bad = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<ParetoFront> fronts(1 + t % 4);
    std::vector<Objectives> all;
    for (auto& f : fronts) {
      const int n = 1 + grid(rng) * 3;
      for (int i = 0; i < n; ++i) {
        Individual ind;
        ind.objectives = {grid(rng) * 1e-3, grid(rng) * 1e-2};
        ind.genome.p_re = {0.0};
        ind.genome.p_im = {0.0};
        ind.genome.p0 = ind.objectives[0];
        ind.genome.omega_d_frac = 1.0 + ind.objectives[1];
        f.points.push_back(ind);
        all.push_back(ind.objectives);
      }
    }
    // brute force ranks
    std::vector<int> rank(all.size(), -1);
    for (int r = 0, left = static_cast<int>(all.size()); left > 0; ++r) {
      std::vector<size_t> layer;
      for (size_t i = 0; i < all.size(); ++i) {
        if (rank[i] >= 0) continue;
        bool dom = false;
        for (size_t j = 0; j < all.size(); ++j)
          if (rank[j] < 0 && dominates(all[j], all[i])) dom = true;
        if (!dom) layer.push_back(i);
      }
      for (auto i : layer) rank[i] = r;
      left -= static_cast<int>(layer.size());
    }
    const auto sorted = non_dominated_sort(all);
    for (size_t f = 0; f < sorted.size(); ++f)
      for (auto i : sorted[f]) bad += rank[i] != static_cast<int>(f);
    std::set<std::pair<double, double>> want, got;
    for (size_t i = 0; i < all.size(); ++i)
      if (rank[i] == 0) want.insert({all[i][0], all[i][1]});
    for (const auto& p : aggregate_fronts(fronts).points) got.insert({p.objectives[0], p.objectives[1]});
    bad += want != got;
  }
  return {bad == 0, fmt("100 random instances, %d mismatches against the O(n^2) oracle", bad)};
}

struct GateCase {
  const char* name;
  GateTarget target;
  int qubits;
  double duration;
  int steps;
  int n_freq;
  double closed_min;
  double chi_min;
};

Outcome criterion9() {
  const EvalContext& ctx = device_context();
  const DriveSpec drive = ctx.drive_for(dss_genome(1));
  RateReport rates;
  rates.gamma_1 = 1.0 / 711.0;
  rates.gamma_z = 1.0 / 3035.0;
  const GateCase cases[2] = {{"X", GateTarget::x(), 1, 10.0, 500, 9, 0.9999, 0.99999},
                             {"sqrt_iSWAP", GateTarget::sqrt_iswap(), 2, 28.0, 1400, 31, 0.9999, 0.9999}};
  bool ok = true;
  std::string d;
  double worst_grad = 0.0;
  for (const auto& gc : cases) {
    const ControlContext cc = rotating_frame_trajectory(drive, ctx.coefficients(), ctx.qubit.delta,
                                                        gc.duration, gc.steps, 4, gc.qubits);
    PulseSpec spec;
    spec.duration = gc.duration;
    spec.steps = gc.steps;
    spec.n_freq = gc.n_freq;
    GrapeSettings gs;
    gs.seed = derive_seed(2024, 9, static_cast<std::uint64_t>(gc.qubits));
    const GrapeResult r = optimize_pulse(spec, cc, gc.target, gs);
    const auto wf = render_controls(r.theta, spec, gc.qubits);
    const LindbladModel model = LindbladModel::from_rates(rates, gc.qubits);
    const ProcessMatrix chi = process_tomography(
        [&](const CMatrix& rho) { return evolve_density(cc, wf, model, rho); }, cc.dimension, 0);
    const double fchi = process_fidelity(chi, chi_from_unitary(gc.target.unitary));

    // gradient check away from the optimum, Richardson-extrapolated central differences
    std::mt19937_64 rng(gs.seed + 1);
    std::normal_distribution<double> g(0.0, 0.3 * spec.f_max);
    std::vector<double> theta(r.theta.size());
    for (auto& x : theta) x = g(rng);
    const auto grad = grape_gradient(theta, spec, cc, gc.target);
    auto loss = [&](size_t i, double h) {
      auto t = theta;
      t[i] += h;
      return 1.0 - pulse_fidelity(t, spec, cc, gc.target);
    };
    double err = 0.0, scale = 0.0;
    for (size_t i = 0; i < theta.size(); i += std::max<size_t>(1, theta.size() / 12)) {
      const double h = 1e-4 * spec.f_max;
      const double d1 = (loss(i, h) - loss(i, -h)) / (2 * h);
      const double d2 = (loss(i, h / 2) - loss(i, -h / 2)) / h;
      err = std::max(err, std::abs((4 * d2 - d1) / 3 - grad[i]));
      scale = std::max(scale, std::abs(grad[i]));
    }
    worst_grad = std::max(worst_grad, err / scale);
    const bool good = r.fidelity >= gc.closed_min && fchi >= gc.chi_min;
    ok = ok && good;
    d += fmt("%s closed F=%.10f F_chi=%.8f [%s]; ", gc.name, r.fidelity, fchi, good ? "ok" : "miss");
  }
  ok = ok && worst_grad <= 1e-6;
  d += fmt("gradient vs FD rel err %.1e", worst_grad);
  return {ok, d};
}

Outcome criterion10() {
  ControlContext ctx;
  ctx.steps = 200;
  ctx.duration = 400.0;
  QubitFrame fr;
  Mat2 sm;
  sm << 0, 1, 0, 0;
  fr.sy.assign(401, pauli_y());
  fr.sz.assign(401, pauli_z());
  fr.sm.assign(401, sm);
  ctx.qubits.push_back(fr);
  const std::vector<Waveform> silent{Waveform{ctx.duration, std::vector<double>(3, 0.0)}};
  double worst = 0.0;
  for (double gphi : {0.5, 2.5}) {
    LindbladModel m;
    m.qubits = {{0.0, gphi}};
    CMatrix rho = CMatrix::Constant(2, 2, 0.5);
    const double e = 0.5 * std::exp(-2.0 * gphi * 1e-3 * ctx.duration);
    worst = std::max(worst, std::abs(evolve_density(ctx, silent, m, rho)(0, 1) - e) / e);
  }
  for (double g1 : {1.0, 4.0}) {
    LindbladModel m;
    m.qubits = {{g1, 0.0}};
    CMatrix rho = CMatrix::Zero(2, 2);
    rho(1, 1) = 1.0;
    const double e = std::exp(-g1 * 1e-3 * ctx.duration);
    worst = std::max(worst, std::abs(evolve_density(ctx, silent, m, rho)(1, 1).real() - e) / e);
  }
  double round_trip = 0.0;
  const double gam = 0.2, lam = 0.35;
  CMatrix k0(2, 2), k1(2, 2), k2(2, 2);
  k0 << 1, 0, 0, std::sqrt(1 - gam);
  k0 *= std::sqrt(1 - lam);
  k1 << 0, std::sqrt(gam), 0, 0;
  k1 *= std::sqrt(1 - lam);
  k2 = std::sqrt(lam) * pauli_z();
  const std::vector<CMatrix> kraus{k0, k1, k2};
  const ProcessMatrix ref = chi_from_kraus(kraus);
  const ProcessMatrix got = process_tomography(
      [&](const CMatrix& r) -> CMatrix {
        CMatrix out = CMatrix::Zero(2, 2);
        for (const auto& k : kraus) out += k * r * k.adjoint();
        return out;
      },
      2);
  round_trip = std::max(round_trip, (got.chi - ref.chi).cwiseAbs().maxCoeff());
  const CMatrix u = GateTarget::sqrt_iswap().unitary;
  const ProcessMatrix two =
      process_tomography([&](const CMatrix& r) -> CMatrix { return u * r * u.adjoint(); }, 4);
  round_trip = std::max(round_trip, (two.chi - chi_from_unitary(u).chi).cwiseAbs().maxCoeff());
  return {worst <= 1e-6 && round_trip <= 1e-10,
          fmt("analytic decay max rel err %.2e, tomography round trip %.2e", worst, round_trip)};
}

}  // namespace

int main() {
  std::setvbuf(stdout, nullptr, _IONBF, 0);
  Outcome (*checks[10])() = {criterion1, criterion2, criterion3, criterion4, criterion5,
                             criterion6, criterion7, criterion8, criterion9, criterion10};
  int failed = 0;
  for (int i = 0; i < 10; ++i) {
    Outcome o;
    try {
      o = checks[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %2d: %s  %s\n", i + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str());
  }
  std::printf("%d/10 criteria pass\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
