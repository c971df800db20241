#ifndef TPR_PARAMS_HPP
#define TPR_PARAMS_HPP

#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <vector>

namespace tpr {

enum class SignConvention { plus, minus };

/// Parameters of the effective two-photon model: mode frequency, per-qubit
/// splittings and couplings. Values are in natural units (omega = 1) unless
/// the caller tracks rad/s explicitly; no unit conversion happens implicitly.
struct EffectiveParams {
  double omega = 1.0;
  std::vector<double> omega_q;
  std::vector<double> g;
  SignConvention sign_convention = SignConvention::minus;

  int n_qubits() const { return int(omega_q.size()); }
  void validate() const;

  static EffectiveParams single(double omega, double omega_q, double g,
                                SignConvention sc = SignConvention::minus);
  static EffectiveParams homogeneous(int n_qubits, double omega, double omega_q, double g,
                                     SignConvention sc = SignConvention::minus);
};

/// Trapped-ion drive parameters, all angular frequencies in rad/s.
/// The internal transition frequency only ever enters through detunings,
/// so omega_int defaults to zero.
struct PhysicalParams {
  double nu = 0.0;         // trap frequency
  double omega_int = 0.0;  // internal transition (bookkeeping only)
  double delta_r = 0.0;    // red second-sideband detuning
  double delta_b = 0.0;    // blue second-sideband detuning
  double eta = 0.0;        // Lamb-Dicke parameter
  double Omega = 0.0;      // drive strength (both tones)
  double phi_r = 0.0;      // laser phases
  double phi_b = 0.0;

  /// Sideband-resolved regime diagnostics: |delta|/nu and Omega/nu must stay
  /// below `ratio_max`. Returns human-readable violations (empty when clean).
  std::vector<std::string> regime_violations(double ratio_max = 0.25) const;

  /// Lamb-Dicke figure eta^2 (2<n>+1); callers check it against the state.
  double lamb_dicke_figure(double mean_phonon) const;
};

inline double two_pi_hz(double f_hz) { return 6.283185307179586476925286766559 * f_hz; }

/// Effective-model parameters generated by the bichromatic second-sideband
/// drive: omega = (delta_r - delta_b)/4, omega_q = -(delta_r + delta_b)/2,
/// g = eta^2 Omega / 4. Output is a single-qubit parameter set in rad/s with
/// the minus sign convention.
EffectiveParams params_to_effective(const PhysicalParams& p);

/// Inverse map; underdetermined, so exactly one of eta or Omega must be
/// pinned by the caller. Throws std::invalid_argument otherwise.
PhysicalParams effective_to_params(const EffectiveParams& e, double nu,
                                   std::optional<double> eta, std::optional<double> Omega);

nlohmann::json effective_to_json(const EffectiveParams& e);
EffectiveParams effective_from_json(const nlohmann::json& j);
nlohmann::json physical_to_json(const PhysicalParams& p);
PhysicalParams physical_from_json(const nlohmann::json& j);

}  // namespace tpr

#endif
