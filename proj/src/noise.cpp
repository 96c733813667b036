#include "sweetspot/noise.hpp"

#include <cmath>

namespace sweetspot {

namespace {
constexpr double kBoltzmann = 1.380649e-23;
constexpr double kHbar = 1.054571817e-34;
}  // namespace

void NoiseModel::derive(const EffectiveQubit& eq, double e_c, double e_l) {
  a_f = kTwoPi * delta_f * e_l * std::abs(eq.phi_ge);
  a_d = kPi * kPi * tan_delta_c * eq.phi_ge * eq.phi_ge / e_c;
}

NoiseModel NoiseModel::device_defaults(const EffectiveQubit& eq, double e_c, double e_l) {
  NoiseModel n;
  n.derive(eq, e_c, e_l);
  return n;
}

void NoiseModel::validate() const {
  if (a_f < 0.0 || a_d < 0.0) throw Error(ErrorKind::InvalidParameter, "noise amplitudes must be >= 0");
  if (!(omega_ir > 0.0) || !(omega_ir < omega_uv)) {
    throw Error(ErrorKind::InvalidParameter, "need 0 < omega_ir < omega_uv");
  }
  if (!(temperature > 0.0)) throw Error(ErrorKind::InvalidParameter, "temperature must be > 0");
  if (!(dephasing_log_factor >= 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "dephasing_log_factor must be >= 0");
  }
}

double NoiseModel::thermal_frequency() const { return kBoltzmann * temperature / kHbar / 1e6; }

double spectral_density(const NoiseModel& noise, double omega) {
  double w = omega;
  if (std::abs(w) < noise.omega_ir) w = w >= 0.0 ? noise.omega_ir : -noise.omega_ir;
  if (std::abs(w) > noise.omega_uv) return 0.0;
  const double x = w / (2.0 * noise.thermal_frequency());
  // coth(x) + 1 = 2 / (1 - e^{-2x}); stable for both signs.
  const double kappa = 0.5 * std::abs(2.0 / -std::expm1(-2.0 * x));
  const double f = w / kTwoPi;
  return noise.a_f * noise.a_f * std::abs(kTwoPi / w) + kappa * noise.a_d * f * f;
}

RateReport decoherence_rates(const FilterWeights& weights, double omega_gap, double omega_d,
                             const NoiseModel& noise) {
  RateReport r;
  const int kmax = weights.k_max;
  double edge = 0.0;

  r.gamma_z = 0.5 * std::abs(weights.z(0)) * noise.a_f * std::sqrt(2.0) *
              noise.dephasing_log_factor;
  for (int k = -kmax; k <= kmax; ++k) {
    const double sp = std::norm(weights.plus(k)) * spectral_density(noise, k * omega_d - omega_gap);
    const double sm = std::norm(weights.minus(k)) * spectral_density(noise, k * omega_d + omega_gap);
    double sz = 0.0;
    if (k != 0) sz = 0.25 * std::norm(weights.z(k)) * spectral_density(noise, k * omega_d);
    r.gamma_plus += sp;
    r.gamma_minus += sm;
    r.gamma_z += sz;
    if (std::abs(k) == kmax) edge += sp + sm + sz;
  }
  r.gamma_1 = r.gamma_plus + r.gamma_minus;
  const double inf = std::numeric_limits<double>::infinity();
  r.t1 = r.gamma_1 > 0.0 ? 1.0 / r.gamma_1 : inf;
  r.t_phi = r.gamma_z > 0.0 ? 1.0 / r.gamma_z : inf;
  const double total = r.gamma_1 + r.gamma_z;
  r.truncation_warning = total > 0.0 && edge > 1e-12 * total;
  return r;
}

}  // namespace sweetspot
