#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sweetspot/circuit.hpp"
#include "sweetspot/floquet.hpp"
#include "sweetspot/noise.hpp"

namespace sweetspot {

using Objectives = std::array<double, 2>;  // (gamma_1, gamma_z) in 1/us

// Search-space point. omega_d = omega_d_frac * Delta.
struct Genome {
  double p0 = 0.0;
  std::vector<double> p_re;
  std::vector<double> p_im;
  double omega_d_frac = 1.0;

  static constexpr double kFracLo = 0.5;
  static constexpr double kFracHi = 1.5;

  int order() const { return static_cast<int>(p_re.size()); }
  int dimension() const { return 2 * order() + 2; }
  void validate() const;

  // Flat layout: p0, re_1..re_n, im_1..im_n, omega_d_frac.
  std::vector<double> flatten() const;
  static Genome unflatten(const std::vector<double>& x, int n);
  static std::vector<double> lower_bounds(int n);
  static std::vector<double> upper_bounds(int n);

  std::vector<cplx> coefficients() const;
};

// Quantities fixed for a whole run.
struct EvalContext {
  CircuitParams circuit;
  EffectiveQubit qubit;
  double phi_dc = kPi;
  double phi_ac = 0.004 * kPi;
  NoiseModel noise;
  int k_max = 0;  // 0 selects default_k_max(order)

  // Diagonalizes the circuit and derives noise amplitudes; `noise` supplies the
  // raw parameters (delta_f, tan_delta_c, temperature, cutoffs, log factor).
  static EvalContext prepare(const CircuitParams& circuit, double phi_dc, double phi_ac,
                             const NoiseModel& noise = {});

  DriveSpec drive_for(const Genome& g) const;
  EffectiveCoefficients coefficients() const;
};

struct Evaluation {
  Objectives objectives{};
  bool feasible = false;
  double omega_gap = 0.0;
  double omega_d = 0.0;
  FilterWeights weights;
  RateReport rates;
};

struct Provenance {
  std::string strategy;
  std::uint64_t seed = 0;
  int generation = 0;
};

struct Individual {
  Genome genome;
  Objectives objectives{};
  int rank = 0;
  double fitness = 0.0;          // lower is better; strategy specific
  double diversity_score = 0.0;  // higher is better
  std::shared_ptr<const Evaluation> cache;
  Provenance provenance;
};

enum class Strategy { nsga2, spea2, ibea, moead };
const char* to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

struct OptimizerConfig {
  int population_m = 100;
  int generations_n = 2000;
  Strategy strategy = Strategy::nsga2;
  double crossover_rate = 0.9;
  std::optional<double> mutation_rate;  // default 1/dim
  double mutation_sigma = 0.1;          // fraction of box width
  double sbx_eta = 20.0;
  std::uint64_t seed = 1;
  int n = 4;
  int threads = 0;                      // 0: hardware concurrency
  int moead_neighbors = 10;
  int moead_replacements = 2;
  double moead_delta = 0.9;
  double ibea_kappa = 0.05;

  void validate() const;
  double effective_mutation_rate() const;
};

struct ParetoFront {
  std::vector<Individual> points;
  std::vector<Provenance> provenance() const;
};

// Infeasible genomes get +inf objectives; never throws on degenerate gaps.
Evaluation evaluate_individual(const Genome& genome, const EvalContext& ctx);

bool dominates(const Objectives& a, const Objectives& b);

// Fronts of indices into `pop`; sets Individual::rank.
std::vector<std::vector<std::size_t>> non_dominated_sort(std::vector<Individual>& pop);
std::vector<std::vector<std::size_t>> non_dominated_sort(const std::vector<Objectives>& objs);

// log10 objectives scaled to [0, 1] per component; infinities map above the finite max.
std::vector<Objectives> normalized_objectives(const std::vector<Objectives>& objs);

std::vector<double> crowding_distance(const std::vector<Objectives>& norm,
                                      const std::vector<std::size_t>& front);

struct Spea2Fitness {
  std::vector<int> strength;
  std::vector<double> raw;
  std::vector<double> density;
  std::vector<double> fitness;
};
// `norm` is used for density only; dominance is taken on `objs`.
Spea2Fitness spea2_fitness(const std::vector<Objectives>& objs,
                           const std::vector<Objectives>& norm, int k_neighbor);

double epsilon_indicator(const Objectives& a, const Objectives& b);
std::vector<double> ibea_fitness(const std::vector<Objectives>& norm, double kappa);

// Uniform weights and Euclidean neighborhoods for MOEA/D with m subproblems.
std::vector<std::array<double, 2>> moead_weights(int m);
std::vector<std::vector<int>> moead_neighborhoods(const std::vector<std::array<double, 2>>& w,
                                                  int t);

// pool holds parents followed by offspring; returns exactly m individuals.
// For moead, pool[i] and pool[m + i] belong to subproblem i.
std::vector<Individual> environmental_select(Strategy strategy, std::vector<Individual> pool,
                                             std::size_t m, const OptimizerConfig& cfg);

// Deterministic seed derivation.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

// SBX crossover + Gaussian mutation with clipping, on flattened genomes.
std::pair<Genome, Genome> vary(const Genome& a, const Genome& b, const OptimizerConfig& cfg,
                               std::uint64_t stream_seed);

struct GenerationSnapshot {
  int generation = 0;
  std::vector<Individual> population;
};
using GenerationCallback = std::function<void(const GenerationSnapshot&)>;

ParetoFront run_stage1(const OptimizerConfig& config, const EvalContext& ctx,
                       const GenerationCallback& on_generation = {});

ParetoFront aggregate_fronts(const std::vector<ParetoFront>& fronts);

}  // namespace sweetspot
