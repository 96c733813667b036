#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>

#include "CLI11.hpp"
#include "json.hpp"

#include "sweetspot/dss.hpp"
#include "sweetspot/gate.hpp"
#include "sweetspot/io.hpp"
#include "sweetspot/opensys.hpp"
#include "sweetspot/pareto.hpp"

using namespace sweetspot;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kConfigError = 2, kNumericalFailure = 3, kDependencyMissing = 4 };

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = -1;
};

struct Session {
  RunConfig cfg;
  fs::path out;
  Manifest manifest;
};

Session open_session(const Globals& g) {
  if (g.config.empty()) throw Error(ErrorKind::Config, "--config is required");
  Session s{load_config(g.config), {}, {}};
  if (g.seed) {
    s.cfg.seed = *g.seed;
    s.cfg.source_text += "\nseed=" + std::to_string(*g.seed);
  }
  if (!g.out.empty()) s.cfg.output_dir = g.out;
  if (g.threads >= 0) s.cfg.threads = g.threads;
  s.cfg.optimizer.threads = s.cfg.threads;
  s.cfg.classify.threads = s.cfg.threads;
  s.out = s.cfg.output_dir;
  fs::create_directories(s.out);
  s.manifest = Manifest::load_or_create(s.out, s.cfg);
  return s;
}

std::string require(const fs::path& p, const char* producer) {
  if (!fs::exists(p)) {
    throw Error(ErrorKind::Dependency,
                "missing " + p.string() + "; run `" + producer + "` first");
  }
  return read_file(p);
}

void finish(Session& s, const std::string& stage, const std::vector<fs::path>& files,
            std::vector<std::uint64_t> seeds = {}) {
  if (seeds.empty()) seeds.push_back(s.cfg.seed);
  s.manifest.record(stage, files, s.out, seeds);
  s.manifest.save(s.out);
  for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
}

int cmd_fluxonium(const Globals& g) {
  Session s = open_session(g);
  const EffectiveQubit eq = diagonalize_circuit(s.cfg.circuit, kPi);
  const fs::path p = s.out / "fluxonium.json";
  write_atomic(p, qubit_to_json(eq, s.cfg.circuit).dump(2) + "\n");
  std::printf("delta = %.9f rad/us (%.9f GHz), phi_ge = %.9f\n", eq.delta,
              eq.delta / (kTwoPi * 1000.0), eq.phi_ge);
  finish(s, "fluxonium", {p});
  return kOk;
}

int cmd_evaluate(const Globals& g, const std::string& genome_file) {
  Session s = open_session(g);
  json j;
  try {
    j = json::parse(read_file(genome_file));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, std::string("genome file: ") + e.what());
  } catch (const Error&) {
    throw Error(ErrorKind::Config, "cannot read genome file " + genome_file);
  }
  std::vector<Genome> genomes;
  if (j.is_object() && j.contains("genomes")) {
    for (const auto& e : j.at("genomes")) genomes.push_back(genome_from_json(e));
  } else {
    genomes.push_back(genome_from_json(j));
  }
  if (genomes.empty()) throw Error(ErrorKind::Config, "genome file holds no genomes");
  const EvalContext ctx = s.cfg.context();
  int n = 0;
  std::vector<Individual> pts;
  for (const auto& gen : genomes) {
    Individual ind;
    ind.genome = gen;
    auto ev = std::make_shared<Evaluation>(evaluate_individual(gen, ctx));
    ind.objectives = ev->objectives;
    ind.cache = ev;
    ind.provenance = {"manual", s.cfg.seed, 0};
    n = std::max(n, gen.order());
    pts.push_back(std::move(ind));
  }
  const std::string csv = front_csv(pts, ctx, n);
  const fs::path p = s.out / "evaluate.csv";
  write_atomic(p, csv);
  std::cout << csv;
  finish(s, "evaluate", {p});
  return kOk;
}

int cmd_optimize(const Globals& g) {
  Session s = open_session(g);
  const EvalContext ctx = s.cfg.context();
  std::vector<fs::path> files;
  std::vector<std::uint64_t> seeds;
  json index = json::array();
  const fs::path dir = s.out / "fronts";
  for (std::size_t si = 0; si < s.cfg.strategies.size(); ++si) {
    for (int r = 0; r < s.cfg.runs_per_strategy; ++r) {
      OptimizerConfig oc = s.cfg.optimizer;
      oc.strategy = s.cfg.strategies[si];
      oc.seed = derive_seed(s.cfg.seed, si, static_cast<std::uint64_t>(r));
      const std::string stem = std::string(to_string(oc.strategy)) + "_" + std::to_string(r);
      GenerationCallback cb;
      if (s.cfg.snapshot_every > 0) {
        cb = [&](const GenerationSnapshot& snap) {
          if (snap.generation % s.cfg.snapshot_every != 0) return;
          std::vector<Individual> pop = snap.population;
          const auto fronts = non_dominated_sort(pop);
          std::vector<Individual> nd;
          for (auto i : fronts.front()) nd.push_back(pop[i]);
          const fs::path p = dir / "snapshots" / (stem + "_g" + std::to_string(snap.generation) + ".csv");
          write_atomic(p, front_csv(nd, ctx, oc.n));
          files.push_back(p);
        };
      }
      const ParetoFront f = run_stage1(oc, ctx, cb);
      const fs::path p = dir / (stem + ".csv");
      write_atomic(p, front_csv(f.points, ctx, oc.n));
      files.push_back(p);
      seeds.push_back(oc.seed);
      index.push_back({{"strategy", to_string(oc.strategy)}, {"seed", oc.seed}, {"file", stem + ".csv"}});
      std::printf("%s run %d (seed %llu): %zu front points\n", to_string(oc.strategy), r,
                  static_cast<unsigned long long>(oc.seed), f.points.size());
    }
  }
  const fs::path ip = dir / "index.json";
  write_atomic(ip, index.dump(2) + "\n");
  files.push_back(ip);
  finish(s, "optimize", files, seeds);
  return kOk;
}

int cmd_aggregate(const Globals& g) {
  Session s = open_session(g);
  const EvalContext ctx = s.cfg.context();
  const fs::path dir = s.out / "fronts";
  const json index = json::parse(require(dir / "index.json", "optimize"));
  std::vector<ParetoFront> fronts;
  for (const auto& e : index) {
    ParetoFront f;
    f.points = read_front_csv(require(dir / e.at("file").get<std::string>(), "optimize"), ctx);
    fronts.push_back(std::move(f));
  }
  const ParetoFront agg = aggregate_fronts(fronts);
  const fs::path p = s.out / "aggregate.csv";
  write_atomic(p, front_csv(agg.points, ctx, s.cfg.optimizer.n));
  std::printf("aggregated %zu fronts into %zu points\n", fronts.size(), agg.points.size());
  finish(s, "aggregate", {p});
  return kOk;
}

int cmd_classify(const Globals& g) {
  Session s = open_session(g);
  const EvalContext ctx = s.cfg.context();
  ParetoFront front;
  front.points = read_front_csv(require(s.out / "aggregate.csv", "aggregate"), ctx);
  const ClassifiedFront cf = classify_front(front, ctx, s.cfg.classify);
  const fs::path p = s.out / "classified.csv";
  write_atomic(p, classified_csv(cf, ctx, s.cfg.optimizer.n));
  std::printf("plain %d, dss %d, double_dss %d\n", cf.count_plain, cf.count_dss, cf.count_double);
  finish(s, "classify", {p});
  return kOk;
}

int cmd_bounds(const Globals& g) {
  Session s = open_session(g);
  const EvalContext ctx = s.cfg.context();
  const auto pts = read_front_csv(require(s.out / "aggregate.csv", "aggregate"), ctx);
  std::string csv = "t1_us,t_ub_general_us,t_ub_dss_us,margin_general,margin_dss,gz0_abs,dss_label,violation_general,violation_dss\n";
  int viol_general = 0, viol_dss = 0, dss_points = 0;
  for (const auto& p : pts) {
    const Evaluation ev = evaluate_individual(p.genome, ctx);
    if (!ev.feasible) continue;
    const BoundReport b = bound_report(ev.weights, ev.omega_gap, ev.omega_d, ctx.qubit.delta,
                                       ev.rates, ctx.noise);
    const double gz0 = std::abs(ev.weights.z(0));
    const DriveSpec d = ctx.drive_for(p.genome);
    const DssLabel label = classify(gz0, std::abs(double_dss_sum(d, ev.weights)),
                                    s.cfg.classify.dss_threshold, s.cfg.classify.double_threshold);
    const bool vg = b.t1 > b.t_ub_general;
    const bool is_dss = label != DssLabel::plain;
    const bool vd = is_dss && b.t1 > b.t_ub_dss;
    viol_general += vg;
    viol_dss += vd;
    dss_points += is_dss;
    csv += format_number(b.t1) + ',' + format_number(b.t_ub_general) + ',' +
           format_number(b.t_ub_dss) + ',' + format_number(b.margin_general) + ',' +
           format_number(b.margin_dss) + ',' + format_number(gz0) + ',' + to_string(label) + ',' +
           (vg ? "1" : "0") + ',' + (vd ? "1" : "0") + "\n";
  }
  const fs::path p = s.out / "bounds.csv";
  write_atomic(p, csv);
  const json summary = {{"points", pts.size()},
                        {"dss_points", dss_points},
                        {"violations_general", viol_general},
                        {"violations_dss", viol_dss}};
  const fs::path ps = s.out / "bounds_summary.json";
  write_atomic(ps, summary.dump(2) + "\n");
  std::printf("%zu points, general-bound violations %d, DSS-bound violations %d (of %d DSS points)\n",
              pts.size(), viol_general, viol_dss, dss_points);
  finish(s, "bounds", {p, ps});
  return kOk;
}

Genome job_genome(const Session& s, const GateJob& job, const EvalContext& ctx) {
  if (job.genome) return *job.genome;
  const auto pts = read_front_csv(require(s.out / "classified.csv", "classify"), ctx);
  if (job.front_index >= static_cast<int>(pts.size())) {
    throw Error(ErrorKind::Config, "front_index " + std::to_string(job.front_index) +
                                       " beyond the classified front");
  }
  return pts[static_cast<std::size_t>(job.front_index)].genome;
}

int cmd_grape(const Globals& g) {
  Session s = open_session(g);
  if (s.cfg.gates.empty()) throw Error(ErrorKind::Config, "config has no gate jobs");
  const EvalContext ctx = s.cfg.context();
  std::vector<fs::path> files;
  for (const auto& job : s.cfg.gates) {
    const Genome gen = job_genome(s, job, ctx);
    const ControlContext cc = rotating_frame_trajectory(
        ctx.drive_for(gen), ctx.coefficients(), ctx.qubit.delta, job.pulse.duration,
        job.pulse.steps, 4, job.qubits, job.coupling_j);
    GrapeSettings gs = job.grape;
    gs.seed = derive_seed(s.cfg.seed, gs.seed, 0x6a7e);
    const GrapeResult res = optimize_pulse(job.pulse, cc, GateTarget::by_name(job.target), gs);
    json pj = pulse_to_json(job, res, res.fidelity);
    pj["genome"] = genome_to_json(gen);
    const fs::path p = s.out / "pulses" / (job.name + ".json");
    write_atomic(p, pj.dump(2) + "\n");
    files.push_back(p);
    std::printf("%s: F = %.12f after %d iterations (%s)\n", job.name.c_str(), res.fidelity,
                res.iterations, res.message.c_str());
  }
  finish(s, "grape", files);
  return kOk;
}

int cmd_simulate(const Globals& g) {
  Session s = open_session(g);
  if (s.cfg.gates.empty()) throw Error(ErrorKind::Config, "config has no gate jobs");
  const EvalContext ctx = s.cfg.context();
  std::vector<fs::path> files;
  for (const auto& job : s.cfg.gates) {
    const json pj = json::parse(require(s.out / "pulses" / (job.name + ".json"), "grape"));
    const Genome gen = genome_from_json(pj.at("genome"));
    const std::vector<double> theta = pj.at("theta").get<std::vector<double>>();
    const ControlContext cc = rotating_frame_trajectory(
        ctx.drive_for(gen), ctx.coefficients(), ctx.qubit.delta, job.pulse.duration,
        job.pulse.steps, 4, job.qubits, job.coupling_j);
    RateReport rates;
    if (job.t1_us && job.tphi_us) {
      rates.gamma_1 = 1.0 / *job.t1_us;
      rates.gamma_z = 1.0 / *job.tphi_us;
    } else {
      const Evaluation ev = evaluate_individual(gen, ctx);
      if (!ev.feasible) throw Error(ErrorKind::DegenerateGap, "operating point is infeasible");
      rates = ev.rates;
      if (job.t1_us) rates.gamma_1 = 1.0 / *job.t1_us;
      if (job.tphi_us) rates.gamma_z = 1.0 / *job.tphi_us;
    }
    const auto wf = render_controls(theta, job.pulse, job.qubits);
    const LindbladModel model = LindbladModel::from_rates(rates, job.qubits);
    EvolveOptions eo;
    eo.rk_substeps = job.rk_substeps;
    const ProcessMatrix chi = process_tomography(
        [&](const CMatrix& rho) { return evolve_density(cc, wf, model, rho, eo); }, cc.dimension,
        s.cfg.threads);
    const GateTarget target = GateTarget::by_name(job.target);
    const double f_chi = process_fidelity(chi, chi_from_unitary(target.unitary));
    const double f_closed = gate_fidelity(propagate_closed(cc, wf), target);
    std::vector<double> re, im;
    for (long r = 0; r < chi.chi.rows(); ++r) {
      for (long c = 0; c < chi.chi.cols(); ++c) {
        re.push_back(chi.chi(r, c).real());
        im.push_back(chi.chi(r, c).imag());
      }
    }
    const json out = {{"gate", job.name},
                      {"target", job.target},
                      {"process_fidelity", f_chi},
                      {"closed_fidelity", f_closed},
                      {"gamma_1_per_us", rates.gamma_1},
                      {"gamma_phi_per_us", rates.gamma_z},
                      {"chi_dim", chi.chi.rows()},
                      {"chi_re", re},
                      {"chi_im", im}};
    const fs::path p = s.out / "process" / (job.name + ".json");
    write_atomic(p, out.dump(2) + "\n");
    files.push_back(p);
    std::printf("%s: F_chi = %.8f, closed F = %.10f\n", job.name.c_str(), f_chi, f_closed);
  }
  finish(s, "simulate", files);
  return kOk;
}

int cmd_truncation(const Globals& g) {
  Session s = open_session(g);
  const EvalContext ctx = s.cfg.context();
  const auto& ts = s.cfg.truncation;
  std::string csv = "order,k_max,mode_infidelity\n";
  for (int n : ts.orders) {
    if (n < 1) throw Error(ErrorKind::Config, "truncation orders must be >= 1");
    std::mt19937_64 rng(derive_seed(s.cfg.seed, 0x7c, static_cast<std::uint64_t>(n)));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Genome gen;
    gen.p0 = 0.5 * (u(rng) + 1.0);
    for (int k = 0; k < n; ++k) {
      gen.p_re.push_back(u(rng));
      gen.p_im.push_back(u(rng));
    }
    gen.omega_d_frac = 1.0 + 0.45 * u(rng);
    const DriveSpec d = ctx.drive_for(gen);
    const auto ref = reference_floquet_via_propagator(d, ctx.coefficients(), ctx.qubit.delta, ts.substeps);
    for (int k = std::max(ts.k_min, n); k <= ts.k_max; ++k) {
      const auto sol = solve_drive(d, ctx.coefficients(), ctx.qubit.delta, k);
      csv += std::to_string(n) + ',' + std::to_string(k) + ',' +
             format_number(mode_infidelity(sol, ref)) + "\n";
    }
  }
  const fs::path p = s.out / "truncation.csv";
  write_atomic(p, csv);
  finish(s, "truncation-study", {p});
  return kOk;
}

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config: return kConfigError;
    case ErrorKind::Dependency: return kDependencyMissing;
    default: return kNumericalFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamical sweet spot workbench for flux-modulated fluxonium"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Override the config seed");
  app.add_option("--config", g.config, "Run configuration (JSON)");
  app.add_option("--out", g.out, "Override the output directory");
  app.add_option("--threads", g.threads, "Worker threads (0: all cores)");

  std::string genome_file;
  auto* fl = app.add_subcommand("fluxonium", "Diagonalize the circuit and write the qubit fixture");
  auto* ev = app.add_subcommand("evaluate", "Rates for explicit genomes");
  ev->add_option("--genome", genome_file, "Genome JSON file")->required();
  auto* op = app.add_subcommand("optimize", "Evolutionary search per strategy and run");
  auto* ag = app.add_subcommand("aggregate", "Merge run-level fronts");
  auto* cl = app.add_subcommand("classify", "Label DSS / double-DSS points");
  auto* bo = app.add_subcommand("bounds", "Check T1 upper bounds over the aggregated front");
  auto* gr = app.add_subcommand("grape", "Optimize gate pulses");
  auto* si = app.add_subcommand("simulate", "Open-system process tomography of the pulses");
  auto* tr = app.add_subcommand("truncation-study", "Mode infidelity versus harmonic truncation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }
  if (*seed_opt) g.seed = seed;

  try {
    if (*fl) return cmd_fluxonium(g);
    if (*ev) return cmd_evaluate(g, genome_file);
    if (*op) return cmd_optimize(g);
    if (*ag) return cmd_aggregate(g);
    if (*cl) return cmd_classify(g);
    if (*bo) return cmd_bounds(g);
    if (*gr) return cmd_grape(g);
    if (*si) return cmd_simulate(g);
    if (*tr) return cmd_truncation(g);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error [config]: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericalFailure;
  }
  return kOk;
}
