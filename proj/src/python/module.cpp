#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sweetspot/dss.hpp"
#include "sweetspot/gate.hpp"
#include "sweetspot/io.hpp"
#include "sweetspot/opensys.hpp"
#include "sweetspot/pareto.hpp"

namespace py = pybind11;
using namespace sweetspot;

namespace {

py::dict rates_dict(const RateReport& r) {
  py::dict d;
  d["gamma_z"] = r.gamma_z;
  d["gamma_plus"] = r.gamma_plus;
  d["gamma_minus"] = r.gamma_minus;
  d["gamma_1"] = r.gamma_1;
  d["t1"] = r.t1;
  d["t_phi"] = r.t_phi;
  d["truncation_warning"] = r.truncation_warning;
  return d;
}

py::dict point_dict(const Individual& p) {
  py::dict d;
  d["genome"] = p.genome;
  d["gamma_1"] = p.objectives[0];
  d["gamma_z"] = p.objectives[1];
  d["strategy"] = p.provenance.strategy;
  d["seed"] = p.provenance.seed;
  return d;
}

ParetoFront front_from(const std::vector<Genome>& genomes, const EvalContext& ctx) {
  ParetoFront f;
  for (const auto& g : genomes) {
    Individual i;
    i.genome = g;
    auto ev = std::make_shared<Evaluation>(evaluate_individual(g, ctx));
    i.objectives = ev->objectives;
    i.cache = ev;
    f.points.push_back(std::move(i));
  }
  return f;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dynamical sweet spots of flux-modulated fluxonium";

  py::register_exception<Error>(m, "SweetspotError");

  py::class_<CircuitParams>(m, "CircuitParams")
      .def(py::init<>())
      .def_readwrite("e_c", &CircuitParams::e_c)
      .def_readwrite("e_l", &CircuitParams::e_l)
      .def_readwrite("e_j", &CircuitParams::e_j)
      .def_readwrite("fock_dim", &CircuitParams::fock_dim);

  py::class_<EffectiveQubit>(m, "EffectiveQubit")
      .def_readonly("delta", &EffectiveQubit::delta)
      .def_readonly("phi_ge", &EffectiveQubit::phi_ge)
      .def_readonly("spectrum", &EffectiveQubit::spectrum);

  m.def("diagonalize_circuit", &diagonalize_circuit, py::arg("params"), py::arg("phi_ext"),
        py::arg("rel_tol") = 1e-8, py::arg("levels") = 6);

  py::class_<NoiseModel>(m, "NoiseModel")
      .def(py::init<>())
      .def_readwrite("delta_f", &NoiseModel::delta_f)
      .def_readwrite("tan_delta_c", &NoiseModel::tan_delta_c)
      .def_readwrite("temperature", &NoiseModel::temperature)
      .def_readwrite("omega_ir", &NoiseModel::omega_ir)
      .def_readwrite("omega_uv", &NoiseModel::omega_uv)
      .def_readwrite("dephasing_log_factor", &NoiseModel::dephasing_log_factor)
      .def_readwrite("a_f", &NoiseModel::a_f)
      .def_readwrite("a_d", &NoiseModel::a_d);
  m.def("spectral_density", &spectral_density);

  py::class_<Genome>(m, "Genome")
      .def(py::init<>())
      .def(py::init([](double p0, std::vector<double> re, std::vector<double> im, double frac) {
             Genome g{p0, std::move(re), std::move(im), frac};
             g.validate();
             return g;
           }),
           py::arg("p0"), py::arg("p_re"), py::arg("p_im"), py::arg("omega_d_frac"))
      .def_readwrite("p0", &Genome::p0)
      .def_readwrite("p_re", &Genome::p_re)
      .def_readwrite("p_im", &Genome::p_im)
      .def_readwrite("omega_d_frac", &Genome::omega_d_frac)
      .def_property_readonly("order", &Genome::order)
      .def("flatten", &Genome::flatten)
      .def("__repr__", [](const Genome& g) { return "Genome(" + genome_to_json(g).dump() + ")"; });

  py::class_<EvalContext>(m, "EvalContext")
      .def(py::init([](double phi_dc, double phi_ac, const CircuitParams& cp) {
             return EvalContext::prepare(cp, phi_dc, phi_ac);
           }),
           py::arg("phi_dc") = kPi, py::arg("phi_ac") = 0.004 * kPi,
           py::arg("circuit") = CircuitParams{})
      .def_readonly("qubit", &EvalContext::qubit)
      .def_readonly("noise", &EvalContext::noise)
      .def_readonly("phi_dc", &EvalContext::phi_dc)
      .def_readonly("phi_ac", &EvalContext::phi_ac)
      .def_readwrite("k_max", &EvalContext::k_max);

  m.def("evaluate", [](const Genome& g, const EvalContext& ctx) {
    const Evaluation ev = evaluate_individual(g, ctx);
    py::dict d = rates_dict(ev.rates);
    d["feasible"] = ev.feasible;
    d["omega_gap"] = ev.omega_gap;
    d["omega_d"] = ev.omega_d;
    d["gz0_abs"] = std::abs(ev.weights.z(0));
    d["parseval"] = ev.weights.parseval_sum();
    return d;
  });

  m.def("filter_weights", [](const Genome& g, const EvalContext& ctx, int k_max) {
    const DriveSpec d = ctx.drive_for(g);
    const FloquetSolution sol = solve_drive(d, ctx.coefficients(), ctx.qubit.delta, k_max);
    const FilterWeights w = compute_filter_weights(sol);
    py::dict out;
    out["omega_gap"] = sol.omega_gap;
    out["eps_plus"] = sol.eps_plus;
    out["eps_minus"] = sol.eps_minus;
    out["k_max"] = w.k_max;
    out["g_z"] = w.g_z;
    out["g_plus"] = w.g_plus;
    out["g_minus"] = w.g_minus;
    return out;
  }, py::arg("genome"), py::arg("context"), py::arg("k_max") = 0);

  m.def("truncation_infidelity", [](const Genome& g, const EvalContext& ctx, int k_max, int substeps) {
    const DriveSpec d = ctx.drive_for(g);
    const auto ref = reference_floquet_via_propagator(d, ctx.coefficients(), ctx.qubit.delta, substeps);
    return mode_infidelity(solve_drive(d, ctx.coefficients(), ctx.qubit.delta, k_max), ref);
  }, py::arg("genome"), py::arg("context"), py::arg("k_max"), py::arg("substeps") = 4096);

  m.def("bounds", [](const Genome& g, const EvalContext& ctx) {
    const Evaluation ev = evaluate_individual(g, ctx);
    if (!ev.feasible) throw Error(ErrorKind::DegenerateGap, "infeasible operating point");
    const BoundReport b = bound_report(ev.weights, ev.omega_gap, ev.omega_d, ctx.qubit.delta, ev.rates, ctx.noise);
    py::dict d;
    d["t1"] = b.t1;
    d["t_ub_general"] = b.t_ub_general;
    d["t_ub_dss"] = b.t_ub_dss;
    return d;
  });

  m.def("optimize", [](const std::string& strategy, int population, int generations, std::uint64_t seed,
                       int n, const EvalContext& ctx, int threads) {
    OptimizerConfig cfg;
    cfg.strategy = strategy_from_string(strategy);
    cfg.population_m = population;
    cfg.generations_n = generations;
    cfg.seed = seed;
    cfg.n = n;
    cfg.threads = threads;
    ParetoFront f;
    {
      py::gil_scoped_release release;
      f = run_stage1(cfg, ctx);
    }
    py::list out;
    for (const auto& p : f.points) out.append(point_dict(p));
    return out;
  }, py::arg("strategy"), py::arg("population") = 32, py::arg("generations") = 200, py::arg("seed") = 1,
        py::arg("n") = 4, py::arg("context") = EvalContext::prepare(CircuitParams{}, kPi, 0.004 * kPi),
        py::arg("threads") = 0);

  m.def("non_dominated_sort", [](const std::vector<std::array<double, 2>>& objs) {
    return non_dominated_sort(objs);
  });

  m.def("aggregate", [](const std::vector<std::vector<Genome>>& fronts, const EvalContext& ctx) {
    std::vector<ParetoFront> fs;
    for (const auto& f : fronts) fs.push_back(front_from(f, ctx));
    py::list out;
    for (const auto& p : aggregate_fronts(fs).points) out.append(point_dict(p));
    return out;
  });

  m.def("classify", [](const std::vector<Genome>& genomes, const EvalContext& ctx, bool finite_differences) {
    ClassifyOptions opts;
    opts.finite_differences = finite_differences;
    const ClassifiedFront cf = classify_front(front_from(genomes, ctx), ctx, opts);
    py::list out;
    for (const auto& p : cf.points) {
      py::dict d = point_dict(p.point);
      d["label"] = to_string(p.label);
      d["gz0_abs"] = p.sensitivity.gz0_abs;
      d["double_dss_metric"] = p.sensitivity.double_dss_metric;
      d["d_omega_dc"] = p.sensitivity.d_omega_d_phi_dc;
      d["d_omega_ac"] = p.sensitivity.d_omega_d_phi_ac;
      d["t_ub_general"] = p.bounds.t_ub_general;
      d["t_ub_dss"] = p.bounds.t_ub_dss;
      out.append(d);
    }
    return out;
  }, py::arg("genomes"), py::arg("context"), py::arg("finite_differences") = true);

  m.def("design_gate", [](const std::string& target, const Genome& g, const EvalContext& ctx, double duration_ns,
                          int steps, int n_freq, double f_max_mhz, double coupling_mhz, std::uint64_t seed,
                          std::optional<double> t1_us, std::optional<double> tphi_us, bool open_system) {
    const GateTarget tgt = GateTarget::by_name(target);
    const int qubits = tgt.unitary.rows() == 4 ? 2 : 1;
    PulseSpec spec;
    spec.duration = duration_ns;
    spec.steps = steps;
    spec.n_freq = n_freq;
    spec.f_max = kTwoPi * f_max_mhz * 1e-3;
    spec.validate();
    py::dict out;
    py::gil_scoped_release release;
    const ControlContext cc = rotating_frame_trajectory(ctx.drive_for(g), ctx.coefficients(), ctx.qubit.delta,
                                                        duration_ns, steps, 4, qubits, kTwoPi * coupling_mhz * 1e-3);
    GrapeSettings gs;
    gs.seed = seed;
    const GrapeResult r = optimize_pulse(spec, cc, tgt, gs);
    double f_chi = std::numeric_limits<double>::quiet_NaN();
    CMatrix chi;
    if (open_system) {
      RateReport rates = evaluate_individual(g, ctx).rates;
      if (t1_us) rates.gamma_1 = 1.0 / *t1_us;
      if (tphi_us) rates.gamma_z = 1.0 / *tphi_us;
      const auto wf = render_controls(r.theta, spec, qubits);
      const LindbladModel model = LindbladModel::from_rates(rates, qubits);
      const ProcessMatrix pm = process_tomography(
          [&](const CMatrix& rho) { return evolve_density(cc, wf, model, rho); }, cc.dimension, 0);
      f_chi = process_fidelity(pm, chi_from_unitary(tgt.unitary));
      chi = pm.chi;
    }
    py::gil_scoped_acquire acquire;
    out["theta"] = r.theta;
    out["fidelity"] = r.fidelity;
    out["iterations"] = r.iterations;
    out["converged"] = r.converged;
    out["process_fidelity"] = f_chi;
    out["chi"] = chi;
    return out;
  }, py::arg("target"), py::arg("genome"), py::arg("context"), py::arg("duration_ns") = 10.0,
        py::arg("steps") = 500, py::arg("n_freq") = 9, py::arg("f_max_mhz") = 100.0,
        py::arg("coupling_mhz") = 48.0, py::arg("seed") = 1, py::arg("t1_us") = py::none(),
        py::arg("tphi_us") = py::none(), py::arg("open_system") = true);

  m.def("process_fidelity_of_kraus", [](const std::vector<CMatrix>& kraus, const CMatrix& target) {
    return process_fidelity(chi_from_kraus(kraus), chi_from_unitary(target));
  });

  m.def("load_config", [](const std::string& path) {
    const RunConfig c = load_config(path);
    py::dict d;
    d["seed"] = c.seed;
    d["output_dir"] = c.output_dir;
    d["phi_dc"] = c.phi_dc;
    d["phi_ac"] = c.phi_ac;
    d["population_m"] = c.optimizer.population_m;
    d["generations_n"] = c.optimizer.generations_n;
    std::vector<std::string> names;
    for (auto s : c.strategies) names.emplace_back(to_string(s));
    d["strategies"] = names;
    return d;
  });

  m.attr("__version__") = kToolVersion;
}
