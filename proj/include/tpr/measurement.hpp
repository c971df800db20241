#ifndef TPR_MEASUREMENT_HPP
#define TPR_MEASUREMENT_HPP

#include "tpr/dynamics.hpp"
#include "tpr/spectrum.hpp"

#include <vector>

namespace tpr {

/// Estimate of <(g_site/N) sigma_x^site (a^2 + a^dag^2)> obtained from the
/// symmetric finite difference of <sigma_z^site> under the measurement
/// Hamiltonian, with one Richardson halving.
struct DerivativeEstimate {
  double value;             // Richardson-extrapolated estimate
  double raw_value;         // plain symmetric difference at fd_step
  double richardson_error;  // |extrapolated - refined| estimate on `value`
  double fd_step;
  bool step_ok;             // halving was consistent (nonlinearity subdominant)
};

DerivativeEstimate interaction_via_derivative(const QuantumState& state,
                                              const EffectiveParams& params, int site,
                                              double fd_step = 0.0 /* 0 = auto */);

/// Plain symmetric-difference estimate at a fixed step (exposes the h^2
/// convergence order).
double derivative_symmetric(const QuantumState& state, const EffectiveParams& params, int site,
                            double fd_step);

/// One term <exp(sign * i n sigma_rot phase) sigma_meas>, realized by evolving
/// under H = sign * n sigma_rot for a time phase/2 and measuring sigma_meas.
struct ParityProtocolTerm {
  double sign;
  QubitAxis rotation_axis;
  QubitAxis measured_axis;
  double phase;
  Complex weight;
};

struct ParityDecomposition {
  std::vector<ParityProtocolTerm> terms;
  /// The four-term combination reconstructing Re(Pi) + i Im(Pi) for N = 1.
  static ParityDecomposition standard();
};

/// The operator sum_k w_k exp(sign_k i n sigma_i phi_k) sigma_j; equals the
/// generalized parity for the standard decomposition.
FockOperator decomposition_operator(const ParityDecomposition& decomposition,
                                    const HilbertSpec& spec);

/// Protocol estimate of <Pi> using exact H = +/- n sigma_i generators.
Complex parity_via_protocol(const QuantumState& state, const ParityDecomposition& decomposition);

/// Far-detuned simultaneous red/blue sideband drive and its second-order
/// static description. `h_eff` is the complete second-order generator
/// (lambda^2/delta) (a+a^dag)^2 sigma_z, which contains the number-dependent
/// part `number_shift` = (lambda^2/delta)(2n+1) sigma_z plus a squeezing
/// part; the two coincide only when the squeezing terms are rotated away.
struct DispersiveModel {
  double delta;
  double lambda;  // Omega0 * eta / 2
  double rate;    // lambda^2 / delta, sign follows delta
  double phase;
  TimeDependentHamiltonian full;
  FockOperator h_eff;
  FockOperator number_shift;
  FockOperator squeeze_part;
  FockOperator carrier_compensation;  // -(1/2) Omega0 eta sigma_z
  bool regime_ok;
  double predicted_error;  // leading dressing amplitude lambda/|delta|
};

DispersiveModel dispersive_effective(double delta, double Omega0, double eta, double phase,
                                     const HilbertSpec& spec, double ratio_min = 20.0);

struct DispersiveValidation {
  double window;
  double fidelity_h_eff;         // full model vs complete second-order form
  double fidelity_number_shift;  // full model vs (2n+1)-only form
};

/// Integrates the full drive and both effective forms from `psi0` over
/// `window` (default: one protocol time (pi/4)/|rate|) and reports the final
/// state fidelities.
DispersiveValidation validate_dispersive(const DispersiveModel& model, const QuantumState& psi0,
                                         double window = 0.0, double tol = 1e-9);

struct DispersiveSettings {
  double delta;
  double Omega0;
  double eta;
  double phase = 0.0;
};

/// Protocol estimate of <Pi> with the +/- n sigma_i generators realized by
/// the dispersive construction (h_eff evolution plus carrier compensation,
/// conjugated by local rotations for the sigma_x axis).
Complex parity_via_protocol(const QuantumState& state, const ParityDecomposition& decomposition,
                            const DispersiveSettings& settings);

}  // namespace tpr

#endif
