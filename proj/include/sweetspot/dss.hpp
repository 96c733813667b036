#pragma once

#include <string>
#include <vector>

#include "sweetspot/pareto.hpp"

namespace sweetspot {

inline constexpr double kDssThreshold = 1e-4;
inline constexpr double kDoubleDssThreshold = 0.1;

// min_k |x - k|
double distance_to_nearest_integer(double x);

// Bounds in us; +inf at their singular sets or when a_f * a_d = 0.
double t1_upper_bound_general(const FilterWeights& weights, double omega_gap, double omega_d,
                              const NoiseModel& noise);
double t1_upper_bound_dss(double delta, double omega_gap, double omega_d, const NoiseModel& noise);

struct BoundReport {
  double t_ub_general = 0.0;
  double t_ub_dss = 0.0;
  double t1 = 0.0;
  double margin_general = 0.0;
  double margin_dss = 0.0;
};

BoundReport bound_report(const FilterWeights& weights, double omega_gap, double omega_d,
                         double delta, const RateReport& rates, const NoiseModel& noise);

enum class SensitivityAxis { dc, ac };

struct FdEstimate {
  double value = 0.0;      // Richardson-extrapolated dOmega/dB or dOmega/dA
  double coarse = 0.0;     // central difference at step h
  double fine = 0.0;       // central difference at step h/2
  bool consistent = true;  // |coarse - fine| within 1e-3 relative (or tiny absolute)
};

// Central difference of the continuously tracked gap with respect to B (dc) or A (ac).
// step <= 0 selects 1e-5 * delta.
FdEstimate quasienergy_sensitivity_fd(const DriveSpec& drive, const EffectiveCoefficients& coeffs,
                                      double delta, SensitivityAxis which, double step = 0.0,
                                      int k_max = 0);

// sum_k p_k g_z^[k] over |k| <= n (real for a real drive).
double double_dss_sum(const DriveSpec& drive, const FilterWeights& weights);

struct SensitivityReport {
  double gz0_abs = 0.0;
  double double_dss_metric = 0.0;
  double d_omega_d_phi_dc = 0.0;
  double d_omega_d_phi_ac = 0.0;
  double dss_threshold = kDssThreshold;
  double double_threshold = kDoubleDssThreshold;
};

enum class DssLabel { plain, dss, double_dss };
const char* to_string(DssLabel l);

DssLabel classify(double gz0_abs, double double_metric, double dss_threshold = kDssThreshold,
                  double double_threshold = kDoubleDssThreshold);

struct ClassifiedPoint {
  Individual point;
  Evaluation evaluation;
  DssLabel label = DssLabel::plain;
  SensitivityReport sensitivity;
  BoundReport bounds;
  bool fd_ok = true;
};

struct ClassifiedFront {
  std::vector<ClassifiedPoint> points;
  int count_plain = 0;
  int count_dss = 0;
  int count_double = 0;
};

struct ClassifyOptions {
  double dss_threshold = kDssThreshold;
  double double_threshold = kDoubleDssThreshold;
  bool finite_differences = true;
  int threads = 0;
};

ClassifiedFront classify_front(const ParetoFront& front, const EvalContext& ctx,
                               const ClassifyOptions& opts = {});

}  // namespace sweetspot
