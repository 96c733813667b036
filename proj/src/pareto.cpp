#include "sweetspot/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace sweetspot {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

// ---- Genome / context ------------------------------------------------------

void Genome::validate() const {
  if (p_re.size() != p_im.size()) {
    throw Error(ErrorKind::DimensionMismatch, "p_re and p_im differ in length");
  }
  auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
  if (!in(p0, 0.0, 1.0)) throw Error(ErrorKind::InvalidParameter, "p0 outside [0, 1]");
  for (size_t i = 0; i < p_re.size(); ++i) {
    if (!in(p_re[i], -1.0, 1.0) || !in(p_im[i], -1.0, 1.0)) {
      throw Error(ErrorKind::InvalidParameter, "p_k outside [-1, 1]");
    }
  }
  if (!in(omega_d_frac, kFracLo, kFracHi)) {
    throw Error(ErrorKind::InvalidParameter, "omega_d_frac outside [0.5, 1.5]");
  }
}

std::vector<double> Genome::flatten() const {
  std::vector<double> x;
  x.reserve(static_cast<size_t>(dimension()));
  x.push_back(p0);
  x.insert(x.end(), p_re.begin(), p_re.end());
  x.insert(x.end(), p_im.begin(), p_im.end());
  x.push_back(omega_d_frac);
  return x;
}

Genome Genome::unflatten(const std::vector<double>& x, int n) {
  if (static_cast<int>(x.size()) != 2 * n + 2) {
    throw Error(ErrorKind::DimensionMismatch, "flat genome has wrong length");
  }
  Genome g;
  g.p0 = x[0];
  g.p_re.assign(x.begin() + 1, x.begin() + 1 + n);
  g.p_im.assign(x.begin() + 1 + n, x.begin() + 1 + 2 * n);
  g.omega_d_frac = x.back();
  return g;
}

std::vector<double> Genome::lower_bounds(int n) {
  std::vector<double> lo(static_cast<size_t>(2 * n + 2), -1.0);
  lo.front() = 0.0;
  lo.back() = kFracLo;
  return lo;
}

std::vector<double> Genome::upper_bounds(int n) {
  std::vector<double> hi(static_cast<size_t>(2 * n + 2), 1.0);
  hi.back() = kFracHi;
  return hi;
}

std::vector<cplx> Genome::coefficients() const {
  std::vector<cplx> p{cplx(p0, 0.0)};
  for (size_t i = 0; i < p_re.size(); ++i) p.emplace_back(p_re[i], p_im[i]);
  return p;
}

EvalContext EvalContext::prepare(const CircuitParams& circuit, double phi_dc, double phi_ac,
                                 const NoiseModel& noise) {
  EvalContext ctx;
  ctx.circuit = circuit;
  ctx.qubit = diagonalize_circuit(circuit, kPi);
  ctx.phi_dc = phi_dc;
  ctx.phi_ac = phi_ac;
  ctx.noise = noise;
  ctx.noise.derive(ctx.qubit, circuit.e_c, circuit.e_l);
  ctx.noise.validate();
  return ctx;
}

DriveSpec EvalContext::drive_for(const Genome& g) const {
  DriveSpec d;
  d.phi_dc = phi_dc;
  d.phi_ac = phi_ac;
  d.omega_d = g.omega_d_frac * qubit.delta;
  d.p = g.coefficients();
  return d;
}

EffectiveCoefficients EvalContext::coefficients() const {
  return effective_coefficients(qubit, circuit.e_l, phi_dc, phi_ac);
}

// ---- strategy names / config ----------------------------------------------

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::nsga2: return "nsga2";
    case Strategy::spea2: return "spea2";
    case Strategy::ibea: return "ibea";
    case Strategy::moead: return "moead";
  }
  return "?";
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "nsga2") return Strategy::nsga2;
  if (s == "spea2") return Strategy::spea2;
  if (s == "ibea") return Strategy::ibea;
  if (s == "moead") return Strategy::moead;
  throw Error(ErrorKind::Config, "unknown strategy '" + s + "'");
}

void OptimizerConfig::validate() const {
  if (population_m < 8 || population_m % 2 != 0) {
    throw Error(ErrorKind::InvalidParameter, "population_m must be even and >= 8");
  }
  if (generations_n < 0) throw Error(ErrorKind::InvalidParameter, "generations_n must be >= 0");
  if (n < 1) throw Error(ErrorKind::InvalidParameter, "Fourier order n must be >= 1");
  auto unit = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!unit(crossover_rate) || !unit(effective_mutation_rate()) || !unit(moead_delta)) {
    throw Error(ErrorKind::InvalidParameter, "rates must lie in [0, 1]");
  }
  if (!(mutation_sigma >= 0.0) || !(sbx_eta >= 0.0) || !(ibea_kappa > 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "mutation_sigma, sbx_eta, ibea_kappa out of range");
  }
  if (moead_neighbors < 2 || moead_replacements < 1) {
    throw Error(ErrorKind::InvalidParameter, "moead neighborhood settings out of range");
  }
}

double OptimizerConfig::effective_mutation_rate() const {
  return mutation_rate ? *mutation_rate : 1.0 / (2.0 * n + 2.0);
}

std::vector<Provenance> ParetoFront::provenance() const {
  std::vector<Provenance> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.provenance);
  return out;
}

// ---- evaluation -----------------------------------------------------------

Evaluation evaluate_individual(const Genome& genome, const EvalContext& ctx) {
  Evaluation ev;
  ev.objectives = {kInf, kInf};
  const DriveSpec drive = ctx.drive_for(genome);
  ev.omega_d = drive.omega_d;
  try {
    genome.validate();
    const FloquetSolution sol = solve_drive(drive, ctx.coefficients(), ctx.qubit.delta, ctx.k_max);
    ev.weights = compute_filter_weights(sol);
    ev.omega_gap = sol.omega_gap;
    ev.rates = decoherence_rates(ev.weights, sol.omega_gap, drive.omega_d, ctx.noise);
    ev.objectives = {ev.rates.gamma_1, ev.rates.gamma_z};
    ev.feasible = std::isfinite(ev.rates.gamma_1) && std::isfinite(ev.rates.gamma_z);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DegenerateGap && e.kind() != ErrorKind::InvalidParameter) throw;
  }
  return ev;
}

// ---- dominance / sorting --------------------------------------------------

bool dominates(const Objectives& a, const Objectives& b) {
  return a[0] <= b[0] && a[1] <= b[1] && (a[0] < b[0] || a[1] < b[1]);
}

std::vector<std::vector<std::size_t>> non_dominated_sort(const std::vector<Objectives>& objs) {
  const std::size_t n = objs.size();
  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<int> count(n, 0);
  std::vector<std::vector<std::size_t>> fronts;
  std::vector<std::size_t> current;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (dominates(objs[i], objs[j])) {
        dominated[i].push_back(j);
        ++count[j];
      } else if (dominates(objs[j], objs[i])) {
        dominated[j].push_back(i);
        ++count[i];
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (count[i] == 0) current.push_back(i);
  }
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t i : current) {
      for (std::size_t j : dominated[i]) {
        if (--count[j] == 0) next.push_back(j);
      }
    }
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(current));
    current = std::move(next);
  }
  return fronts;
}

std::vector<std::vector<std::size_t>> non_dominated_sort(std::vector<Individual>& pop) {
  std::vector<Objectives> objs;
  objs.reserve(pop.size());
  for (const auto& ind : pop) objs.push_back(ind.objectives);
  auto fronts = non_dominated_sort(objs);
  for (std::size_t r = 0; r < fronts.size(); ++r) {
    for (std::size_t i : fronts[r]) pop[i].rank = static_cast<int>(r);
  }
  return fronts;
}

std::vector<Objectives> normalized_objectives(const std::vector<Objectives>& objs) {
  std::vector<Objectives> out(objs.size());
  for (int c = 0; c < 2; ++c) {
    double lo = kInf, hi = -kInf;
    for (const auto& o : objs) {
      if (!std::isfinite(o[c])) continue;
      const double l = std::log10(std::max(o[c], 1e-300));
      lo = std::min(lo, l);
      hi = std::max(hi, l);
    }
    const double span = (hi > lo) ? hi - lo : 1.0;
    for (std::size_t i = 0; i < objs.size(); ++i) {
      const double v = objs[i][c];
      out[i][c] = std::isfinite(v) ? (std::log10(std::max(v, 1e-300)) - lo) / span : 2.0;
    }
  }
  return out;
}

std::vector<double> crowding_distance(const std::vector<Objectives>& norm,
                                      const std::vector<std::size_t>& front) {
  const std::size_t n = front.size();
  std::vector<double> dist(n, 0.0);
  if (n <= 2) {
    std::fill(dist.begin(), dist.end(), kInf);
    return dist;
  }
  std::vector<std::size_t> order(n);
  for (int c = 0; c < 2; ++c) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return norm[front[a]][c] < norm[front[b]][c];
    });
    const double lo = norm[front[order.front()]][c];
    const double hi = norm[front[order.back()]][c];
    dist[order.front()] = kInf;
    dist[order.back()] = kInf;
    if (!(hi > lo)) continue;
    for (std::size_t k = 1; k + 1 < n; ++k) {
      dist[order[k]] +=
          (norm[front[order[k + 1]]][c] - norm[front[order[k - 1]]][c]) / (hi - lo);
    }
  }
  return dist;
}

Spea2Fitness spea2_fitness(const std::vector<Objectives>& objs,
                           const std::vector<Objectives>& norm, int k_neighbor) {
  const std::size_t n = objs.size();
  Spea2Fitness f;
  f.strength.assign(n, 0);
  f.raw.assign(n, 0.0);
  f.density.assign(n, 0.0);
  f.fitness.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && dominates(objs[i], objs[j])) ++f.strength[i];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && dominates(objs[j], objs[i])) f.raw[i] += f.strength[j];
    }
  }
  std::vector<double> d;
  for (std::size_t i = 0; i < n; ++i) {
    d.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) d.push_back(std::hypot(norm[i][0] - norm[j][0], norm[i][1] - norm[j][1]));
    }
    double sigma = 0.0;
    if (!d.empty()) {
      const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(std::max(k_neighbor, 1)), d.size());
      std::nth_element(d.begin(), d.begin() + static_cast<long>(k - 1), d.end());
      sigma = d[k - 1];
    }
    f.density[i] = 1.0 / (sigma + 2.0);
    f.fitness[i] = f.raw[i] + f.density[i];
  }
  return f;
}

double epsilon_indicator(const Objectives& a, const Objectives& b) {
  return std::max(a[0] - b[0], a[1] - b[1]);
}

std::vector<double> ibea_fitness(const std::vector<Objectives>& norm, double kappa) {
  const std::size_t n = norm.size();
  double c = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) c = std::max(c, std::abs(epsilon_indicator(norm[i], norm[j])));
    }
  }
  c = std::max(c, 1e-12);
  std::vector<double> fit(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      if (x != y) fit[x] -= std::exp(-epsilon_indicator(norm[y], norm[x]) / (c * kappa));
    }
  }
  return fit;
}

std::vector<std::array<double, 2>> moead_weights(int m) {
  std::vector<std::array<double, 2>> w(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) {
    const double a = m > 1 ? static_cast<double>(i) / (m - 1) : 0.5;
    w[static_cast<size_t>(i)] = {a, 1.0 - a};
  }
  return w;
}

std::vector<std::vector<int>> moead_neighborhoods(const std::vector<std::array<double, 2>>& w,
                                                  int t) {
  const int m = static_cast<int>(w.size());
  t = std::min(t, m);
  std::vector<std::vector<int>> nb(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) {
    std::vector<int> idx(static_cast<size_t>(m));
    std::iota(idx.begin(), idx.end(), 0);
    auto dist = [&](int j) {
      return std::hypot(w[i][0] - w[j][0], w[i][1] - w[j][1]);
    };
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return dist(a) < dist(b); });
    idx.resize(static_cast<size_t>(t));
    nb[static_cast<size_t>(i)] = std::move(idx);
  }
  return nb;
}

// ---- environmental selection ----------------------------------------------

namespace {

std::vector<Objectives> objectives_of(const std::vector<Individual>& pop) {
  std::vector<Objectives> o;
  o.reserve(pop.size());
  for (const auto& ind : pop) o.push_back(ind.objectives);
  return o;
}

// Indices of the per-objective minima (first on ties) among `alive`.
std::vector<std::size_t> extreme_points(const std::vector<Objectives>& objs,
                                        const std::vector<std::size_t>& alive) {
  std::vector<std::size_t> ext;
  for (int c = 0; c < 2; ++c) {
    std::size_t best = alive.front();
    for (std::size_t i : alive) {
      if (objs[i][c] < objs[best][c] ||
          (objs[i][c] == objs[best][c] && objs[i][1 - c] < objs[best][1 - c])) {
        best = i;
      }
    }
    ext.push_back(best);
  }
  return ext;
}

std::vector<Individual> select_nsga2(std::vector<Individual> pool, std::size_t m) {
  const auto fronts = non_dominated_sort(pool);
  const auto norm = normalized_objectives(objectives_of(pool));
  std::vector<Individual> out;
  out.reserve(m);
  for (const auto& front : fronts) {
    const auto cd = crowding_distance(norm, front);
    std::vector<std::size_t> order(front.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return cd[a] > cd[b]; });
    for (std::size_t k : order) {
      if (out.size() == m) break;
      Individual ind = pool[front[k]];
      ind.fitness = ind.rank;
      ind.diversity_score = cd[k];
      out.push_back(std::move(ind));
    }
    if (out.size() == m) break;
  }
  return out;
}

std::vector<Individual> select_spea2(std::vector<Individual> pool, std::size_t m) {
  non_dominated_sort(pool);
  const auto objs = objectives_of(pool);
  const auto norm = normalized_objectives(objs);
  const int k = static_cast<int>(std::sqrt(static_cast<double>(pool.size())));
  const Spea2Fitness fit = spea2_fitness(objs, norm, k);

  std::vector<std::size_t> archive;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (fit.fitness[i] < 1.0) archive.push_back(i);
  }
  if (archive.size() < m) {
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return fit.fitness[a] < fit.fitness[b];
    });
    order.resize(m);
    archive = std::move(order);
  } else {
    while (archive.size() > m) {
      const auto protect = extreme_points(objs, archive);
      std::size_t victim = archive.size();
      std::vector<double> victim_d;
      for (std::size_t a = 0; a < archive.size(); ++a) {
        const std::size_t i = archive[a];
        if (std::find(protect.begin(), protect.end(), i) != protect.end()) continue;
        std::vector<double> d;
        for (std::size_t j : archive) {
          if (j != i) d.push_back(std::hypot(norm[i][0] - norm[j][0], norm[i][1] - norm[j][1]));
        }
        std::sort(d.begin(), d.end());
        if (victim == archive.size() ||
            std::lexicographical_compare(d.begin(), d.end(), victim_d.begin(), victim_d.end())) {
          victim = a;
          victim_d = std::move(d);
        }
      }
      archive.erase(archive.begin() + static_cast<long>(victim));
    }
  }
  std::vector<Individual> out;
  out.reserve(m);
  for (std::size_t i : archive) {
    Individual ind = pool[i];
    ind.fitness = fit.fitness[i];
    ind.diversity_score = 1.0 / fit.density[i] - 2.0;
    out.push_back(std::move(ind));
  }
  return out;
}

std::vector<Individual> select_ibea(std::vector<Individual> pool, std::size_t m, double kappa) {
  non_dominated_sort(pool);
  const auto objs = objectives_of(pool);
  const auto norm = normalized_objectives(objs);
  std::vector<double> fit = ibea_fitness(norm, kappa);
  double c = 0.0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    for (std::size_t j = 0; j < pool.size(); ++j) {
      if (i != j) c = std::max(c, std::abs(epsilon_indicator(norm[i], norm[j])));
    }
  }
  c = std::max(c, 1e-12);
  std::vector<std::size_t> alive(pool.size());
  std::iota(alive.begin(), alive.end(), 0);
  while (alive.size() > m) {
    const auto protect = extreme_points(objs, alive);
    std::size_t victim = alive.size();
    for (std::size_t a = 0; a < alive.size(); ++a) {
      const std::size_t i = alive[a];
      if (std::find(protect.begin(), protect.end(), i) != protect.end()) continue;
      if (victim == alive.size() || fit[i] < fit[alive[victim]]) victim = a;
    }
    const std::size_t x = alive[victim];
    alive.erase(alive.begin() + static_cast<long>(victim));
    for (std::size_t z : alive) fit[z] += std::exp(-epsilon_indicator(norm[x], norm[z]) / (c * kappa));
  }
  std::vector<Individual> out;
  out.reserve(m);
  for (std::size_t i : alive) {
    Individual ind = pool[i];
    ind.fitness = -fit[i];
    ind.diversity_score = 0.0;
    out.push_back(std::move(ind));
  }
  return out;
}

std::vector<Individual> select_moead(std::vector<Individual> pool, std::size_t m,
                                     const OptimizerConfig& cfg) {
  if (pool.size() != 2 * m) {
    throw Error(ErrorKind::DimensionMismatch, "moead selection expects parents + one child per slot");
  }
  const auto w = moead_weights(static_cast<int>(m));
  const auto nb = moead_neighborhoods(w, cfg.moead_neighbors);
  Objectives lo{kInf, kInf}, hi{-kInf, -kInf};
  for (const auto& ind : pool) {
    for (int c = 0; c < 2; ++c) {
      if (!std::isfinite(ind.objectives[c])) continue;
      const double l = std::log10(std::max(ind.objectives[c], 1e-300));
      lo[c] = std::min(lo[c], l);
      hi[c] = std::max(hi[c], l);
    }
  }
  auto tcheby = [&](const Objectives& f, std::size_t slot) {
    double g = 0.0;
    for (int c = 0; c < 2; ++c) {
      if (!std::isfinite(f[c])) return kInf;
      const double span = hi[c] > lo[c] ? hi[c] - lo[c] : 1.0;
      const double l = (std::log10(std::max(f[c], 1e-300)) - lo[c]) / span;
      g = std::max(g, std::max(w[slot][c], 1e-6) * l);
    }
    return g;
  };
  std::vector<Individual> cur(pool.begin(), pool.begin() + static_cast<long>(m));
  for (std::size_t i = 0; i < m; ++i) {
    const Individual& child = pool[m + i];
    int replaced = 0;
    for (int j : nb[i]) {
      const auto sj = static_cast<std::size_t>(j);
      if (tcheby(child.objectives, sj) < tcheby(cur[sj].objectives, sj)) {
        cur[sj] = child;
        if (++replaced >= cfg.moead_replacements) break;
      }
    }
  }
  non_dominated_sort(cur);
  for (std::size_t j = 0; j < m; ++j) {
    cur[j].fitness = tcheby(cur[j].objectives, j);
    cur[j].diversity_score = 0.0;
  }
  return cur;
}

}  // namespace

std::vector<Individual> environmental_select(Strategy strategy, std::vector<Individual> pool,
                                             std::size_t m, const OptimizerConfig& cfg) {
  if (pool.size() < m) throw Error(ErrorKind::DimensionMismatch, "pool smaller than target size");
  switch (strategy) {
    case Strategy::nsga2: return select_nsga2(std::move(pool), m);
    case Strategy::spea2: return select_spea2(std::move(pool), m);
    case Strategy::ibea: return select_ibea(std::move(pool), m, cfg.ibea_kappa);
    case Strategy::moead: return select_moead(std::move(pool), m, cfg);
  }
  return {};
}

// ---- variation ------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0x9e3779b97f4a7c15ULL));
}

std::pair<Genome, Genome> vary(const Genome& a, const Genome& b, const OptimizerConfig& cfg,
                               std::uint64_t stream_seed) {
  std::mt19937_64 rng(stream_seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n = a.order();
  const auto lo = Genome::lower_bounds(n);
  const auto hi = Genome::upper_bounds(n);
  std::vector<double> x1 = a.flatten();
  std::vector<double> x2 = b.flatten();
  const double eta = cfg.sbx_eta;

  if (uni(rng) < cfg.crossover_rate) {
    for (std::size_t i = 0; i < x1.size(); ++i) {
      if (uni(rng) > 0.5) continue;
      if (std::abs(x1[i] - x2[i]) < 1e-14) continue;
      const double y1 = std::min(x1[i], x2[i]);
      const double y2 = std::max(x1[i], x2[i]);
      const double u = uni(rng);
      auto betaq = [&](double beta) {
        const double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
        return u <= 1.0 / alpha ? std::pow(u * alpha, 1.0 / (eta + 1.0))
                                : std::pow(1.0 / (2.0 - u * alpha), 1.0 / (eta + 1.0));
      };
      const double bq1 = betaq(1.0 + 2.0 * (y1 - lo[i]) / (y2 - y1));
      const double bq2 = betaq(1.0 + 2.0 * (hi[i] - y2) / (y2 - y1));
      double c1 = std::clamp(0.5 * ((y1 + y2) - bq1 * (y2 - y1)), lo[i], hi[i]);
      double c2 = std::clamp(0.5 * ((y1 + y2) + bq2 * (y2 - y1)), lo[i], hi[i]);
      if (uni(rng) < 0.5) std::swap(c1, c2);
      x1[i] = c1;
      x2[i] = c2;
    }
  }
  const double rate = cfg.effective_mutation_rate();
  for (auto* x : {&x1, &x2}) {
    for (std::size_t i = 0; i < x->size(); ++i) {
      if (uni(rng) < rate) {
        (*x)[i] += cfg.mutation_sigma * (hi[i] - lo[i]) * gauss(rng);
      }
      (*x)[i] = std::clamp((*x)[i], lo[i], hi[i]);
    }
  }
  return {Genome::unflatten(x1, n), Genome::unflatten(x2, n)};
}

// ---- driver ---------------------------------------------------------------

namespace {

void evaluate_all(std::vector<Individual>& pop, const EvalContext& ctx, int threads) {
  parallel_for(pop.size(), threads, [&](std::size_t i) {
    auto ev = std::make_shared<Evaluation>(evaluate_individual(pop[i].genome, ctx));
    pop[i].objectives = ev->objectives;
    pop[i].cache = std::move(ev);
  });
}

bool better(const Individual& a, const Individual& b) {
  if (a.fitness != b.fitness) return a.fitness < b.fitness;
  return a.diversity_score > b.diversity_score;
}

std::vector<Individual> final_front(const std::vector<Individual>& pop) {
  std::vector<Individual> feasible;
  for (const auto& ind : pop) {
    if (std::isfinite(ind.objectives[0]) && std::isfinite(ind.objectives[1])) {
      feasible.push_back(ind);
    }
  }
  std::vector<Individual> out;
  if (feasible.empty()) return out;
  const auto fronts = non_dominated_sort(feasible);
  for (std::size_t i : fronts.front()) {
    const bool dup = std::any_of(out.begin(), out.end(), [&](const Individual& o) {
      return o.objectives == feasible[i].objectives;
    });
    if (!dup) out.push_back(feasible[i]);
  }
  std::stable_sort(out.begin(), out.end(), [](const Individual& a, const Individual& b) {
    return a.objectives[0] < b.objectives[0];
  });
  return out;
}

}  // namespace

ParetoFront run_stage1(const OptimizerConfig& config, const EvalContext& ctx,
                       const GenerationCallback& on_generation) {
  config.validate();
  const auto m = static_cast<std::size_t>(config.population_m);
  const int n = config.n;
  const auto lo = Genome::lower_bounds(n);
  const auto hi = Genome::upper_bounds(n);
  const std::string name = to_string(config.strategy);

  std::vector<Individual> pop(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::mt19937_64 rng(derive_seed(config.seed, 0, i));
    std::vector<double> x(lo.size());
    for (std::size_t d = 0; d < x.size(); ++d) {
      x[d] = std::uniform_real_distribution<double>(lo[d], hi[d])(rng);
    }
    pop[i].genome = Genome::unflatten(x, n);
    pop[i].provenance = {name, config.seed, 0};
  }
  evaluate_all(pop, ctx, config.threads);

  const bool moead = config.strategy == Strategy::moead;
  std::vector<std::vector<int>> nb;
  if (moead) {
    nb = moead_neighborhoods(moead_weights(config.population_m), config.moead_neighbors);
    non_dominated_sort(pop);
  } else {
    pop = environmental_select(config.strategy, pop, m, config);
  }
  if (on_generation) on_generation({0, pop});

  for (int gen = 1; gen <= config.generations_n; ++gen) {
    std::mt19937_64 rng(derive_seed(config.seed, static_cast<std::uint64_t>(gen), 0xabcdefULL));
    std::uniform_int_distribution<std::size_t> pick(0, m - 1);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<Individual> offspring;
    offspring.reserve(m);

    if (moead) {
      for (std::size_t i = 0; i < m; ++i) {
        const auto& hood = nb[i];
        std::size_t a, b;
        if (uni(rng) < config.moead_delta) {
          std::uniform_int_distribution<std::size_t> ph(0, hood.size() - 1);
          a = static_cast<std::size_t>(hood[ph(rng)]);
          b = static_cast<std::size_t>(hood[ph(rng)]);
        } else {
          a = pick(rng);
          b = pick(rng);
        }
        Individual child;
        child.genome = vary(pop[a].genome, pop[b].genome, config,
                            derive_seed(config.seed, static_cast<std::uint64_t>(gen), i + 1))
                           .first;
        child.provenance = {name, config.seed, gen};
        offspring.push_back(std::move(child));
      }
    } else {
      auto tournament = [&]() -> const Individual& {
        const std::size_t i = pick(rng);
        const std::size_t j = pick(rng);
        return better(pop[j], pop[i]) ? pop[j] : pop[i];
      };
      for (std::size_t k = 0; k < m / 2; ++k) {
        const Individual& pa = tournament();
        const Individual& pb = tournament();
        auto kids = vary(pa.genome, pb.genome, config,
                         derive_seed(config.seed, static_cast<std::uint64_t>(gen), k + 1));
        for (Genome* g : {&kids.first, &kids.second}) {
          Individual child;
          child.genome = std::move(*g);
          child.provenance = {name, config.seed, gen};
          offspring.push_back(std::move(child));
        }
      }
    }
    evaluate_all(offspring, ctx, config.threads);

    std::vector<Individual> pool = std::move(pop);
    pool.insert(pool.end(), std::make_move_iterator(offspring.begin()),
                std::make_move_iterator(offspring.end()));
    pop = environmental_select(config.strategy, std::move(pool), m, config);
    if (on_generation) on_generation({gen, pop});
  }

  ParetoFront front;
  front.points = final_front(pop);
  return front;
}

ParetoFront aggregate_fronts(const std::vector<ParetoFront>& fronts) {
  if (fronts.empty()) throw Error(ErrorKind::EmptyInput, "no fronts to aggregate");
  std::vector<Individual> all;
  for (const auto& f : fronts) all.insert(all.end(), f.points.begin(), f.points.end());
  ParetoFront out;
  if (all.empty()) return out;
  const auto ranks = non_dominated_sort(all);
  for (std::size_t i : ranks.front()) out.points.push_back(all[i]);
  std::stable_sort(out.points.begin(), out.points.end(),
                   [](const Individual& a, const Individual& b) {
                     return a.objectives[0] < b.objectives[0];
                   });
  return out;
}

}  // namespace sweetspot
