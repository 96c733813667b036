#pragma once

#include <functional>
#include <vector>

#include "sweetspot/gate.hpp"
#include "sweetspot/noise.hpp"

namespace sweetspot {

// Rates in 1/us; converted to 1/ns inside the integrator.
struct QubitRates {
  double gamma_1 = 0.0;    // relaxation, jump operator sigma~_-
  double gamma_phi = 0.0;  // dephasing, jump operator sigma~_z
};

struct LindbladModel {
  std::vector<QubitRates> qubits;

  static LindbladModel from_rates(const RateReport& rates, int n_qubits);
  void validate() const;
};

struct EvolveOptions {
  int rk_substeps = 4;          // RK4 steps per pulse step
  bool refinement_check = true; // compare against 2 * rk_substeps
  double refinement_tol = 1e-8;
};

// Fixed-step RK4 of the rotating-frame Lindblad equation. H~ and the jump operators are
// held at their step-midpoint values, matching propagate_closed.
CMatrix evolve_density(const ControlContext& ctx, const std::vector<Waveform>& waveforms,
                       const LindbladModel& model, const CMatrix& rho0,
                       const EvolveOptions& opts = {});

struct ProcessMatrix {
  CMatrix chi;  // Pauli product basis, index sum_q P_q 4^(n-1-q)
  int d = 2;

  void validate(double tol = 1e-10) const;
};

using Channel = std::function<CMatrix(const CMatrix&)>;

// n-qubit Pauli product basis, P_0 = identity.
std::vector<CMatrix> pauli_basis(int d);

// chi of rho -> sum_k K_k rho K_k^dag.
ProcessMatrix chi_from_kraus(const std::vector<CMatrix>& kraus);
ProcessMatrix chi_from_unitary(const CMatrix& u);

// Evaluates the channel on d^2 physical input states and reconstructs chi by linearity.
ProcessMatrix process_tomography(const Channel& channel, int d, int threads = 1);

double process_fidelity(const ProcessMatrix& chi, const ProcessMatrix& target);

}  // namespace sweetspot
