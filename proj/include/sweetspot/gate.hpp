#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sweetspot/floquet.hpp"

namespace sweetspot {

// Gate-level quantities use nanoseconds and rad/ns.
struct PulseSpec {
  double duration = 10.0;            // ns
  int steps = 500;                   // N
  int design_points = 2048;          // intervals of the shaping grid, independent of N
  double f_max = kTwoPi * 0.1;       // rad/ns
  int n_freq = 9;                    // N_c
  double s_amp = 0.0;                // 0: f_max
  double s_slope = 0.0;              // 0: 2 / s_amp (unit slope at the origin)
  double gibbs_tol = 0.02;

  void validate() const;
  double amp() const { return s_amp > 0.0 ? s_amp : f_max; }
  double slope() const { return s_slope > 0.0 ? s_slope : 2.0 / amp(); }
  double dt() const { return duration / steps; }
};

// f(t) = sum_{n=1}^{N_c} c_n sin(n pi t / T).
struct Waveform {
  double duration = 0.0;
  std::vector<double> coeffs;

  double operator()(double t) const;
  std::vector<double> midpoints(int steps) const;  // t = (k + 1/2) T / steps
  std::vector<double> grid(int samples) const;     // t = j T / (samples - 1), exact end zeros
};

struct ShapedPulse {
  Waveform waveform;
  std::vector<double> samples;  // t = j T / (steps - 1)
  double peak = 0.0;            // max |f| on the shaping grid before the guard
  bool guarded = false;         // rescaled for Gibbs overshoot
};

// theta -> raw sine series -> sin^2 window -> scaled sigmoid -> projection on the
// first N_c sine modes (the band limit); overshoot beyond f_max (1 + gibbs_tol) is rescaled.
ShapedPulse shape_pulse(const std::vector<double>& theta, const PulseSpec& spec);

// Vector-Jacobian product of shape_pulse: d/dtheta of sum_n g_n c_n.
std::vector<double> shape_pulse_vjp(const std::vector<double>& theta, const PulseSpec& spec,
                                    const std::vector<double>& grad_coeffs);

struct QubitFrame {
  // Samples on the half-step grid t_i = i * dt / 2, i = 0 .. 2 * steps.
  std::vector<Mat2> sy, sz, sm;
};

struct ControlContext {
  int dimension = 2;
  int steps = 0;
  double duration = 0.0;              // ns
  double coupling_j = kTwoPi * 0.048; // rad/ns
  int substeps = 0;
  std::vector<QubitFrame> qubits;

  int n_qubits() const { return static_cast<int>(qubits.size()); }
  double dt() const { return duration / steps; }
  // H~ at half-grid index i for control amplitudes f (one per qubit).
  CMatrix hamiltonian(int i, const std::vector<double>& f) const;
  // dH~/df_q at half-grid index i.
  CMatrix control_operator(int i, int q) const;
  // Embedded single-qubit operator at half-grid index i.
  CMatrix embed(const Mat2& op, int q) const;
};

// U_q(t) by Magnus-4 substeps of H_q(t) (rad/us, t in us); frame ops U_q^dag op U_q.
// Doubles substeps until samples move by < 1e-9. The same drive frames every qubit.
ControlContext rotating_frame_trajectory(const DriveSpec& drive,
                                         const EffectiveCoefficients& coeffs, double delta,
                                         double duration_ns, int steps, int substeps = 4,
                                         int n_qubits = 1,
                                         double coupling_j = kTwoPi * 0.048);

struct GateTarget {
  CMatrix unitary;
  std::string name;

  static GateTarget identity(int d);
  static GateTarget x();
  static GateTarget y();
  static GateTarget sqrt_iswap();
  static GateTarget by_name(const std::string& name);
  void validate() const;
};

// waveforms[q] holds the step-midpoint samples for qubit q.
CMatrix propagate_closed(const ControlContext& ctx,
                         const std::vector<std::vector<double>>& waveforms);
CMatrix propagate_closed(const ControlContext& ctx, const std::vector<Waveform>& waveforms);

double gate_fidelity(const CMatrix& u, const GateTarget& target);

// theta holds n_freq amplitudes per qubit, concatenated.
std::vector<Waveform> render_controls(const std::vector<double>& theta, const PulseSpec& spec,
                                      int n_qubits);
double pulse_fidelity(const std::vector<double>& theta, const PulseSpec& spec,
                      const ControlContext& ctx, const GateTarget& target);

// Exact gradient of 1 - F with respect to theta.
std::vector<double> grape_gradient(const std::vector<double>& theta, const PulseSpec& spec,
                                   const ControlContext& ctx, const GateTarget& target,
                                   double* fidelity = nullptr);

struct GrapeSettings {
  int max_iterations = 2000;
  double learning_rate = 0.02;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double target_infidelity = 1e-9;
  double init_scale = 0.3;   // initial theta ~ N(0, init_scale * f_max)
  std::uint64_t seed = 1;
  std::vector<double> initial_theta;
  int restarts = 4;          // fresh random starts if the target is missed
};

struct GrapeResult {
  std::vector<double> theta;
  double fidelity = 0.0;
  std::vector<double> history;
  int iterations = 0;
  bool converged = false;
  std::string message;
};

GrapeResult optimize_pulse(const PulseSpec& spec, const ControlContext& ctx,
                           const GateTarget& target, const GrapeSettings& settings = {});

}  // namespace sweetspot
