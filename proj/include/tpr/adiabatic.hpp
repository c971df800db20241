#ifndef TPR_ADIABATIC_HPP
#define TPR_ADIABATIC_HPP

#include "tpr/dynamics.hpp"
#include "tpr/spectrum.hpp"

#include <utility>
#include <vector>

namespace tpr {

/// Linear coupling ramp g(t) = g_start + (g_end - g_start) t/duration applied
/// homogeneously to every qubit; the run starts from an exact eigenstate of
/// the decoupled Hamiltonian (index counts levels from the ground state up).
struct RampSchedule {
  double g_start = 0.0;
  double g_end = 0.0;
  double duration = 0.0;
  int initial_state_index = 0;
};

struct RampResult {
  std::vector<double> times;
  std::vector<double> coupling;
  std::vector<double> fidelity;   // |<target(g(t)) | psi(t)>|^2, target tracked by
                                  // parity sector and maximal overlap
  std::vector<double> energy;     // <psi| H(g(t)) |psi>
  std::vector<double> parity_re, parity_im;
  double final_fidelity = 0.0;
  int initial_index = 0;
  int final_index = 0;            // global energy rank of the tracked state at g_end
  ParityLabel sector = ParityLabel::mixed;
  double parity_drift = 0.0;      // max |<Pi>(t) - <Pi>(0)|
  double duration = 0.0;
  IntegratorStats stats;
};

RampResult run_ramp(const RampSchedule& schedule, const EffectiveParams& tmpl,
                    const HilbertSpec& spec, double tol = 1e-8, int n_checkpoints = 200);

/// Runs the same ramp with the duration doubled `n_durations - 1` times and
/// reports (duration, final fidelity) pairs; used to pick a duration where
/// the protocol has converged.
std::vector<std::pair<double, double>> duration_ladder(const RampSchedule& schedule,
                                                       const EffectiveParams& tmpl,
                                                       const HilbertSpec& spec, double tol,
                                                       int n_durations);

/// Exact eigenstates of the decoupled (g = 0) Hamiltonian: product states
/// sorted by energy. Returns the basis index of the `index`-th level.
Index decoupled_eigenstate_basis_index(const EffectiveParams& tmpl, const HilbertSpec& spec,
                                       int index);

}  // namespace tpr

#endif
