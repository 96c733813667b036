#pragma once

#include <limits>

#include "sweetspot/circuit.hpp"
#include "sweetspot/floquet.hpp"

namespace sweetspot {

// S(w) = A_f^2 |2pi/w| + kappa(w, T) A_d (w/2pi)^2, kappa = |coth(w/2kT) + 1|/2.
struct NoiseModel {
  double delta_f = 1.8e-6;
  double tan_delta_c = 1.1e-6;
  double temperature = 0.015;             // K
  double omega_ir = kTwoPi * 1e-6;        // 1 Hz in rad/us
  double omega_uv = kTwoPi * 3000.0;      // 3 GHz in rad/us
  double dephasing_log_factor = 4.0;      // sqrt|ln(w_ir t_m)|
  double a_f = 0.0;
  double a_d = 0.0;

  // Fills a_f and a_d from the circuit.
  static NoiseModel device_defaults(const EffectiveQubit& eq, double e_c, double e_l);
  void derive(const EffectiveQubit& eq, double e_c, double e_l);
  void validate() const;
  // k_B T / hbar in rad/us.
  double thermal_frequency() const;
};

double spectral_density(const NoiseModel& noise, double omega);

struct RateReport {
  double gamma_z = 0.0;
  double gamma_plus = 0.0;
  double gamma_minus = 0.0;
  double gamma_1 = 0.0;
  double t1 = std::numeric_limits<double>::infinity();
  double t_phi = std::numeric_limits<double>::infinity();
  // Edge harmonics carried more than 1e-12 of the total.
  bool truncation_warning = false;
};

RateReport decoherence_rates(const FilterWeights& weights, double omega_gap, double omega_d,
                             const NoiseModel& noise);

}  // namespace sweetspot
