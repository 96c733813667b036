#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "sweetspot/dss.hpp"
#include "sweetspot/gate.hpp"
#include "sweetspot/pareto.hpp"

namespace sweetspot {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.3.0";

struct GateJob {
  std::string name = "x";
  std::string target = "X";
  int qubits = 1;
  PulseSpec pulse;
  double coupling_j = kTwoPi * 0.048;  // rad/ns
  int front_index = -1;                // row of the classified front
  std::optional<Genome> genome;        // explicit operating point
  GrapeSettings grape;
  std::optional<double> t1_us;         // override the evaluated rates
  std::optional<double> tphi_us;
  int rk_substeps = 4;
};

struct TruncationStudy {
  std::vector<int> orders{1, 2, 3, 4, 5};
  int k_min = 1;
  int k_max = 20;
  int substeps = 4096;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  int threads = 0;
  CircuitParams circuit;
  double phi_dc = kPi;
  double phi_ac = 0.004 * kPi;
  NoiseModel noise;
  int k_max = 0;
  OptimizerConfig optimizer;
  std::vector<Strategy> strategies{Strategy::nsga2, Strategy::spea2, Strategy::ibea,
                                   Strategy::moead};
  int runs_per_strategy = 1;
  int snapshot_every = 0;
  ClassifyOptions classify;
  std::vector<GateJob> gates;
  TruncationStudy truncation;
  std::string source_text;  // raw config bytes, for hashing

  EvalContext context() const;
};

// Throws Error(Config) on schema violations, unknown keys, or bad values.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

Genome genome_from_json(const nlohmann::json& j);
nlohmann::json genome_to_json(const Genome& g);

nlohmann::json qubit_to_json(const EffectiveQubit& eq, const CircuitParams& cp);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

// Writes via a sibling temporary file and rename.
void write_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

// Front CSV: gamma1_per_us, gammaz_per_us, t1_us, tphi_us, p0, p{k}_re, p{k}_im, omega_d,
// gz0_abs, double_dss_metric, strategy, seed. Infinite values print as "inf".
std::string format_number(double v);
std::string front_csv(const std::vector<Individual>& points, const EvalContext& ctx, int n);
std::string classified_csv(const ClassifiedFront& front, const EvalContext& ctx, int n);
// Rebuilds individuals (genome, objectives, provenance strategy/seed); caches are not restored.
std::vector<Individual> read_front_csv(const std::string& text, const EvalContext& ctx);

struct Manifest {
  nlohmann::json data;

  static Manifest load_or_create(const std::filesystem::path& out_dir, const RunConfig& cfg);
  void record(const std::string& stage, const std::vector<std::filesystem::path>& artifacts,
              const std::filesystem::path& out_dir, const std::vector<std::uint64_t>& seeds);
  void save(const std::filesystem::path& out_dir) const;
};

nlohmann::json pulse_to_json(const GateJob& job, const GrapeResult& res, double closed_fidelity);

}  // namespace sweetspot
