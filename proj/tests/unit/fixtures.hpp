#pragma once

#include "sweetspot/circuit.hpp"
#include "sweetspot/pareto.hpp"

namespace fixtures {

// Independent oracle values (dense diagonalization at fock_dim 150, time-domain
// propagation for the drives, mpmath for the spectral density).
inline constexpr double kDelta = 2055.6941201665086;
inline constexpr double kPhiGe = 2.3981126929979024;
inline constexpr double kAf = 0.13462599337491655;
inline constexpr double kAd = 9.936918725635797e-9;
inline constexpr double kSPlusDelta = 0.0016944983437272564;
inline constexpr double kSMinusDelta = 0.00063082325451154616;
inline constexpr double kStaticT1 = 430.04804185253322;
inline constexpr double kOffT1 = 598.3319596624759;
inline constexpr double kOffTphi = 3.561742404485524;

struct DriveFixture {
  const char* name;
  double p0;
  double re[4];
  double im[4];
  double frac;
  double gap;
  double gz0;
  double t1;
  double tphi;
};

inline constexpr DriveFixture kDrives[3] = {
    {"dss1", 0.23, {-0.55, 0.96, -0.58, 0.14}, {0.21, -0.95, 0.31, -0.85}, 1.01,
     1895.2088111303283, 0.00017279447528935343, 805.249790477, 4990.90101713},
    {"dss2", 0.69, {0.73, 0.97, 0.28, -0.16}, {-0.99, -0.88, 0.84, 0.58}, 1.13,
     1873.0250116738293, 0.07111280761950306, 647.190699441, 36.8005867858},
    {"dss3", 0.37, {-0.99, 0.01, -0.99, 0.99}, {-1.0, -0.87, 0.99, 1.0}, 0.99,
     1616.458891831072, 0.01599769283382732, 836.972103053, 160.498978876},
};

inline sweetspot::Genome genome(const DriveFixture& f) {
  sweetspot::Genome g;
  g.p0 = f.p0;
  g.p_re.assign(f.re, f.re + 4);
  g.p_im.assign(f.im, f.im + 4);
  g.omega_d_frac = f.frac;
  return g;
}

inline const sweetspot::EvalContext& context() {
  static const sweetspot::EvalContext ctx =
      sweetspot::EvalContext::prepare(sweetspot::CircuitParams{}, sweetspot::kPi,
                                      0.004 * sweetspot::kPi);
  return ctx;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace fixtures
