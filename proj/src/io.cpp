#include "sweetspot/io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace sweetspot {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::Config, msg); }

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) config_error(where + " must be an object");
  std::set<std::string> ok(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!ok.count(it.key())) config_error("unknown key '" + it.key() + "' in " + where);
  }
}

template <class T>
T get(const json& j, const char* key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(std::string("bad value for '") + key + "' in " + where);
  }
}

double ghz(double v) { return kTwoPi * 1000.0 * v; }  // GHz -> rad/us

GateJob parse_gate(const json& j, std::size_t idx) {
  const std::string where = "gates[" + std::to_string(idx) + "]";
  allow_keys(j, where, {"name", "target", "duration_ns", "steps", "n_freq", "f_max_mhz",
                        "coupling_mhz", "front_index", "genome", "grape", "t1_us", "tphi_us",
                        "rk_substeps", "gibbs_tol", "design_points"});
  GateJob g;
  g.target = get<std::string>(j, "target", where, "X");
  g.name = get<std::string>(j, "name", where, g.target);
  GateTarget::by_name(g.target);
  g.qubits = g.target == "sqrt_iswap" ? 2 : 1;
  if (g.qubits == 2) {
    g.pulse.duration = 28.0;
    g.pulse.n_freq = 31;
  }
  g.pulse.duration = get<double>(j, "duration_ns", where, g.pulse.duration);
  g.pulse.steps = get<int>(j, "steps", where, g.pulse.steps);
  g.pulse.n_freq = get<int>(j, "n_freq", where, g.pulse.n_freq);
  g.pulse.f_max = kTwoPi * 1e-3 * get<double>(j, "f_max_mhz", where, 100.0);
  g.pulse.gibbs_tol = get<double>(j, "gibbs_tol", where, g.pulse.gibbs_tol);
  g.pulse.design_points = get<int>(j, "design_points", where, g.pulse.design_points);
  g.coupling_j = kTwoPi * 1e-3 * get<double>(j, "coupling_mhz", where, 48.0);
  g.front_index = get<int>(j, "front_index", where, -1);
  if (j.contains("genome")) g.genome = genome_from_json(j.at("genome"));
  if (!g.genome && g.front_index < 0) config_error(where + " needs 'genome' or 'front_index'");
  if (j.contains("t1_us")) g.t1_us = get<double>(j, "t1_us", where, 0.0);
  if (j.contains("tphi_us")) g.tphi_us = get<double>(j, "tphi_us", where, 0.0);
  g.rk_substeps = get<int>(j, "rk_substeps", where, 4);
  if (j.contains("grape")) {
    const json& gj = j.at("grape");
    const std::string gw = where + ".grape";
    allow_keys(gj, gw, {"max_iterations", "learning_rate", "target_infidelity", "init_scale", "seed", "restarts"});
    g.grape.max_iterations = get<int>(gj, "max_iterations", gw, g.grape.max_iterations);
    g.grape.learning_rate = get<double>(gj, "learning_rate", gw, g.grape.learning_rate);
    g.grape.target_infidelity = get<double>(gj, "target_infidelity", gw, g.grape.target_infidelity);
    g.grape.init_scale = get<double>(gj, "init_scale", gw, g.grape.init_scale);
    g.grape.seed = get<std::uint64_t>(gj, "seed", gw, g.grape.seed);
    g.grape.restarts = get<int>(gj, "restarts", gw, g.grape.restarts);
  }
  try {
    g.pulse.validate();
  } catch (const Error& e) {
    config_error(where + ": " + e.what());
  }
  return g;
}

}  // namespace

EvalContext RunConfig::context() const {
  EvalContext ctx = EvalContext::prepare(circuit, phi_dc, phi_ac, noise);
  ctx.k_max = k_max;
  return ctx;
}

Genome genome_from_json(const json& j) {
  allow_keys(j, "genome", {"p0", "p_re", "p_im", "omega_d_frac"});
  Genome g;
  g.p0 = get<double>(j, "p0", "genome", 0.0);
  g.p_re = get<std::vector<double>>(j, "p_re", "genome", {});
  g.p_im = get<std::vector<double>>(j, "p_im", "genome", {});
  g.omega_d_frac = get<double>(j, "omega_d_frac", "genome", 1.0);
  try {
    g.validate();
  } catch (const Error& e) {
    config_error(std::string("genome: ") + e.what());
  }
  return g;
}

json genome_to_json(const Genome& g) {
  return {{"p0", g.p0}, {"p_re", g.p_re}, {"p_im", g.p_im}, {"omega_d_frac", g.omega_d_frac}};
}

RunConfig parse_config(const json& j) {
  allow_keys(j, "config", {"schema_version", "seed", "output_dir", "threads", "circuit", "flux",
                           "noise", "floquet", "optimizer", "classify", "gates",
                           "truncation_study"});
  if (!j.contains("schema_version")) config_error("missing 'schema_version'");
  if (get<int>(j, "schema_version", "config", 0) != kSchemaVersion) {
    config_error("unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
  }
  RunConfig c;
  c.seed = get<std::uint64_t>(j, "seed", "config", c.seed);
  c.output_dir = get<std::string>(j, "output_dir", "config", c.output_dir);
  c.threads = get<int>(j, "threads", "config", c.threads);

  if (j.contains("circuit")) {
    const json& s = j.at("circuit");
    allow_keys(s, "circuit", {"e_c_ghz", "e_l_ghz", "e_j_ghz", "fock_dim"});
    c.circuit.e_c = ghz(get<double>(s, "e_c_ghz", "circuit", 1.0));
    c.circuit.e_l = ghz(get<double>(s, "e_l_ghz", "circuit", 0.79));
    c.circuit.e_j = ghz(get<double>(s, "e_j_ghz", "circuit", 4.43));
    c.circuit.fock_dim = get<int>(s, "fock_dim", "circuit", c.circuit.fock_dim);
  }
  try {
    c.circuit.validate();
  } catch (const Error& e) {
    config_error(std::string("circuit: ") + e.what());
  }
  if (j.contains("flux")) {
    const json& s = j.at("flux");
    allow_keys(s, "flux", {"phi_dc_over_pi", "phi_ac_over_pi"});
    c.phi_dc = kPi * get<double>(s, "phi_dc_over_pi", "flux", 1.0);
    c.phi_ac = kPi * get<double>(s, "phi_ac_over_pi", "flux", 0.004);
  }
  if (j.contains("noise")) {
    const json& s = j.at("noise");
    allow_keys(s, "noise", {"delta_f", "tan_delta_c", "temperature_k", "omega_ir_hz",
                            "omega_uv_ghz", "dephasing_log_factor"});
    c.noise.delta_f = get<double>(s, "delta_f", "noise", c.noise.delta_f);
    c.noise.tan_delta_c = get<double>(s, "tan_delta_c", "noise", c.noise.tan_delta_c);
    c.noise.temperature = get<double>(s, "temperature_k", "noise", c.noise.temperature);
    c.noise.omega_ir = kTwoPi * 1e-6 * get<double>(s, "omega_ir_hz", "noise", 1.0);
    c.noise.omega_uv = ghz(get<double>(s, "omega_uv_ghz", "noise", 3.0));
    c.noise.dephasing_log_factor =
        get<double>(s, "dephasing_log_factor", "noise", c.noise.dephasing_log_factor);
  }
  try {
    NoiseModel probe = c.noise;
    probe.validate();
  } catch (const Error& e) {
    config_error(std::string("noise: ") + e.what());
  }
  if (j.contains("floquet")) {
    allow_keys(j.at("floquet"), "floquet", {"k_max"});
    c.k_max = get<int>(j.at("floquet"), "k_max", "floquet", 0);
    if (c.k_max < 0) config_error("floquet.k_max must be >= 0");
  }
  if (j.contains("optimizer")) {
    const json& s = j.at("optimizer");
    const std::string w = "optimizer";
    allow_keys(s, w, {"population_m", "generations_n", "strategies", "runs_per_strategy",
                      "crossover_rate", "mutation_rate", "mutation_sigma", "sbx_eta", "n",
                      "moead_neighbors", "moead_replacements", "moead_delta", "ibea_kappa",
                      "snapshot_every"});
    auto& o = c.optimizer;
    o.population_m = get<int>(s, "population_m", w, o.population_m);
    o.generations_n = get<int>(s, "generations_n", w, o.generations_n);
    o.crossover_rate = get<double>(s, "crossover_rate", w, o.crossover_rate);
    if (s.contains("mutation_rate")) o.mutation_rate = get<double>(s, "mutation_rate", w, 0.0);
    o.mutation_sigma = get<double>(s, "mutation_sigma", w, o.mutation_sigma);
    o.sbx_eta = get<double>(s, "sbx_eta", w, o.sbx_eta);
    o.n = get<int>(s, "n", w, o.n);
    o.moead_neighbors = get<int>(s, "moead_neighbors", w, o.moead_neighbors);
    o.moead_replacements = get<int>(s, "moead_replacements", w, o.moead_replacements);
    o.moead_delta = get<double>(s, "moead_delta", w, o.moead_delta);
    o.ibea_kappa = get<double>(s, "ibea_kappa", w, o.ibea_kappa);
    c.runs_per_strategy = get<int>(s, "runs_per_strategy", w, c.runs_per_strategy);
    c.snapshot_every = get<int>(s, "snapshot_every", w, c.snapshot_every);
    if (s.contains("strategies")) {
      c.strategies.clear();
      for (const auto& name : get<std::vector<std::string>>(s, "strategies", w, {})) {
        c.strategies.push_back(strategy_from_string(name));
      }
      if (c.strategies.empty()) config_error("optimizer.strategies must not be empty");
    }
    if (c.runs_per_strategy < 1) config_error("optimizer.runs_per_strategy must be >= 1");
    try {
      o.validate();
    } catch (const Error& e) {
      config_error(std::string("optimizer: ") + e.what());
    }
  }
  if (j.contains("classify")) {
    const json& s = j.at("classify");
    allow_keys(s, "classify", {"dss_threshold", "double_threshold", "finite_differences"});
    c.classify.dss_threshold = get<double>(s, "dss_threshold", "classify", c.classify.dss_threshold);
    c.classify.double_threshold =
        get<double>(s, "double_threshold", "classify", c.classify.double_threshold);
    c.classify.finite_differences =
        get<bool>(s, "finite_differences", "classify", c.classify.finite_differences);
  }
  if (j.contains("gates")) {
    if (!j.at("gates").is_array()) config_error("'gates' must be an array");
    for (std::size_t i = 0; i < j.at("gates").size(); ++i) c.gates.push_back(parse_gate(j.at("gates")[i], i));
  }
  if (j.contains("truncation_study")) {
    const json& s = j.at("truncation_study");
    allow_keys(s, "truncation_study", {"orders", "k_min", "k_max", "substeps"});
    c.truncation.orders = get<std::vector<int>>(s, "orders", "truncation_study", c.truncation.orders);
    c.truncation.k_min = get<int>(s, "k_min", "truncation_study", c.truncation.k_min);
    c.truncation.k_max = get<int>(s, "k_max", "truncation_study", c.truncation.k_max);
    c.truncation.substeps = get<int>(s, "substeps", "truncation_study", c.truncation.substeps);
  }
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error&) {
    config_error("cannot read config " + path.string());
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c = parse_config(j);
  c.source_text = std::move(text);
  return c;
}

json qubit_to_json(const EffectiveQubit& eq, const CircuitParams& cp) {
  return {{"delta_rad_per_us", eq.delta},
          {"delta_ghz", eq.delta / (kTwoPi * 1000.0)},
          {"phi_ge", eq.phi_ge},
          {"spectrum_rad_per_us", eq.spectrum},
          {"e_c_rad_per_us", cp.e_c},
          {"e_l_rad_per_us", cp.e_l},
          {"e_j_rad_per_us", cp.e_j},
          {"fock_dim", cp.fock_dim}};
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Dependency, "cannot write " + tmp.string());
    out << contents;
    if (!out) throw Error(ErrorKind::Dependency, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Dependency, "missing file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- CSV ------------------------------------------------------------------

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string front_header(int n) {
  std::string h = "gamma1_per_us,gammaz_per_us,t1_us,tphi_us,p0";
  for (int k = 1; k <= n; ++k) {
    h += ",p" + std::to_string(k) + "_re,p" + std::to_string(k) + "_im";
  }
  h += ",omega_d,gz0_abs,double_dss_metric,strategy,seed";
  return h;
}

std::string front_row(const Individual& ind, const Evaluation& ev, const EvalContext& ctx, int n) {
  const auto& g = ind.genome;
  const double inf = std::numeric_limits<double>::infinity();
  std::ostringstream row;
  const double g1 = ind.objectives[0], gz = ind.objectives[1];
  row << format_number(g1) << ',' << format_number(gz) << ','
      << format_number(g1 > 0 ? 1.0 / g1 : inf) << ',' << format_number(gz > 0 ? 1.0 / gz : inf)
      << ',' << format_number(g.p0);
  for (int k = 0; k < n; ++k) {
    const auto i = static_cast<size_t>(k);
    row << ',' << format_number(i < g.p_re.size() ? g.p_re[i] : 0.0) << ','
        << format_number(i < g.p_im.size() ? g.p_im[i] : 0.0);
  }
  const DriveSpec d = ctx.drive_for(g);
  const double gz0 = ev.feasible ? std::abs(ev.weights.z(0)) : inf;
  const double dd = ev.feasible ? std::abs(double_dss_sum(d, ev.weights)) : inf;
  row << ',' << format_number(d.omega_d) << ',' << format_number(gz0) << ',' << format_number(dd)
      << ',' << ind.provenance.strategy << ',' << ind.provenance.seed;
  return row.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_number(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw Error(ErrorKind::Config, "bad number '" + s + "' in CSV");
  }
}

}  // namespace

std::string front_csv(const std::vector<Individual>& points, const EvalContext& ctx, int n) {
  std::string out = front_header(n) + "\n";
  for (const auto& p : points) {
    const Evaluation ev = p.cache ? *p.cache : evaluate_individual(p.genome, ctx);
    out += front_row(p, ev, ctx, n) + "\n";
  }
  return out;
}

std::string classified_csv(const ClassifiedFront& front, const EvalContext& ctx, int n) {
  std::string out = front_header(n) + ",dss_label,t_ub_general_us,t_ub_dss_us,d_omega_dc,d_omega_ac\n";
  for (const auto& cp : front.points) {
    out += front_row(cp.point, cp.evaluation, ctx, n);
    out += ',';
    out += to_string(cp.label);
    out += ',' + format_number(cp.bounds.t_ub_general) + ',' + format_number(cp.bounds.t_ub_dss) +
           ',' + format_number(cp.sensitivity.d_omega_d_phi_dc) + ',' +
           format_number(cp.sensitivity.d_omega_d_phi_ac) + "\n";
  }
  return out;
}

std::vector<Individual> read_front_csv(const std::string& text, const EvalContext& ctx) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Config, "empty front CSV");
  const auto header = split(line, ',');
  auto col = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw Error(ErrorKind::Config, "front CSV lacks column '" + name + "'");
  };
  int n = 0;
  while (std::find(header.begin(), header.end(), "p" + std::to_string(n + 1) + "_re") != header.end()) ++n;
  const std::size_t c_g1 = col("gamma1_per_us"), c_gz = col("gammaz_per_us"), c_p0 = col("p0"),
                    c_wd = col("omega_d"), c_st = col("strategy"), c_seed = col("seed");
  std::vector<Individual> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != header.size()) throw Error(ErrorKind::Config, "ragged front CSV row");
    Individual ind;
    ind.objectives = {parse_number(f[c_g1]), parse_number(f[c_gz])};
    ind.genome.p0 = parse_number(f[c_p0]);
    for (int k = 1; k <= n; ++k) {
      ind.genome.p_re.push_back(parse_number(f[col("p" + std::to_string(k) + "_re")]));
      ind.genome.p_im.push_back(parse_number(f[col("p" + std::to_string(k) + "_im")]));
    }
    ind.genome.omega_d_frac = std::clamp(parse_number(f[c_wd]) / ctx.qubit.delta, Genome::kFracLo,
                                         Genome::kFracHi);
    ind.provenance.strategy = f[c_st];
    ind.provenance.seed = std::stoull(f[c_seed]);
    out.push_back(std::move(ind));
  }
  return out;
}

// ---- manifest -------------------------------------------------------------

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

Manifest Manifest::load_or_create(const fs::path& out_dir, const RunConfig& cfg) {
  Manifest m;
  const fs::path p = out_dir / "manifest.json";
  if (fs::exists(p)) {
    try {
      m.data = json::parse(read_file(p));
    } catch (const json::exception&) {
      m.data = json::object();
    }
  }
  const std::string hash = hex64(fnv1a64(cfg.source_text));
  if (!m.data.is_object() || m.data.value("config_hash", "") != hash) {
    m.data = json::object();
    m.data["stages"] = json::object();
  }
  m.data["config_hash"] = hash;
  m.data["run_id"] = hex64(fnv1a64(hash + std::to_string(cfg.seed)));
  m.data["tool_version"] = kToolVersion;
  m.data["seed"] = cfg.seed;
  return m;
}

void Manifest::record(const std::string& stage, const std::vector<fs::path>& artifacts,
                      const fs::path& out_dir, const std::vector<std::uint64_t>& seeds) {
  json entry;
  entry["timestamp"] = utc_now();
  entry["seeds"] = seeds;
  json files = json::array();
  for (const auto& a : artifacts) {
    files.push_back({{"path", fs::relative(a, out_dir).generic_string()},
                     {"fnv1a64", hex64(fnv1a64(read_file(a)))}});
  }
  entry["artifacts"] = files;
  data["stages"][stage] = entry;
}

void Manifest::save(const fs::path& out_dir) const {
  write_atomic(out_dir / "manifest.json", data.dump(2) + "\n");
}

json pulse_to_json(const GateJob& job, const GrapeResult& res, double closed_fidelity) {
  const auto wfs = render_controls(res.theta, job.pulse, job.qubits);
  std::vector<double> samples, re, im;
  json coeffs = json::array();
  for (const auto& w : wfs) {
    const auto s = w.grid(job.pulse.steps);
    const int n = static_cast<int>(s.size());
    for (int k = 0; k <= n / 2; ++k) {
      cplx acc{};
      for (int t = 0; t < n; ++t) acc += s[static_cast<size_t>(t)] * std::exp(-kI * (kTwoPi * k * t / n));
      re.push_back(acc.real());
      im.push_back(acc.imag());
    }
    samples.insert(samples.end(), s.begin(), s.end());
    coeffs.push_back(w.coeffs);
  }
  return {{"gate", job.name},
          {"target", job.target},
          {"qubits", job.qubits},
          {"duration_ns", job.pulse.duration},
          {"steps", job.pulse.steps},
          {"design_points", job.pulse.design_points},
          {"n_freq", job.pulse.n_freq},
          {"f_max_rad_per_ns", job.pulse.f_max},
          {"coupling_rad_per_ns", job.coupling_j},
          {"samples", samples},
          {"spectrum_re", re},
          {"spectrum_im", im},
          {"sine_coefficients", coeffs},
          {"theta", res.theta},
          {"fidelity_history", res.history},
          {"closed_fidelity", closed_fidelity},
          {"converged", res.converged},
          {"message", res.message}};
}

}  // namespace sweetspot
