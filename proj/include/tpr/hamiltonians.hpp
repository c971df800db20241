#ifndef TPR_HAMILTONIANS_HPP
#define TPR_HAMILTONIANS_HPP

#include "tpr/fock.hpp"
#include "tpr/params.hpp"

#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace tpr {

/// Hamiltonian of the form
///   H(t) = sum_k c_k e^{i f_k t} O_k  +  sum_j u_j(t) C_j ,
/// where the harmonic term list is closed under conjugation (so H(t) is
/// Hermitian) and every C_j is Hermitian with a real control u_j.
/// Harmonic terms carry the boson/qubit phase weights needed to transform
/// between interaction pictures generated by alpha*n + beta*sigma_z.
class TimeDependentHamiltonian {
 public:
  struct HarmonicTerm {
    Complex coeff;
    double freq;
    SparseMatrix op;
    int delta_n = 0;     // creation minus annihilation count in op's boson part
    int qubit_sign = 0;  // +1 for a sigma_+ factor, -1 for sigma_-, 0 neither
  };
  struct ControlTerm {
    std::function<double(double)> coeff;
    SparseMatrix op;
  };

  explicit TimeDependentHamiltonian(HilbertSpec spec) : spec_(spec) {}

  static TimeDependentHamiltonian from_static(const FockOperator& h);

  void add_harmonic(HarmonicTerm term);
  /// Adds c e^{ift} O together with its Hermitian conjugate.
  void add_harmonic_pair(Complex coeff, double freq, const SparseMatrix& op, int delta_n,
                         int qubit_sign);
  void add_control(std::function<double(double)> coeff, SparseMatrix op);

  const HilbertSpec& spec() const { return spec_; }
  const std::vector<HarmonicTerm>& harmonic_terms() const { return terms_; }
  std::optional<double> period_hint() const;

  FockOperator evaluate(double t) const;
  /// y = H(t) x without assembling the sparse sum.
  void apply_into(double t, const Vector& x, Vector& y) const;

 private:
  HilbertSpec spec_;
  std::vector<HarmonicTerm> terms_;
  std::vector<ControlTerm> controls_;
};

/// N-qubit two-photon Hamiltonian
///   omega a^dag a + sum_n (omega_q^n/2) sigma_z^n
///     +/- (1/N) sum_n g_n sigma_x^n (a^2 + a^dag^2),
/// with the coupling sign taken from params.sign_convention.
FockOperator build_dicke(const EffectiveParams& params, const HilbertSpec& spec);

/// Same model rewritten through effective position/momentum operators,
/// (m omega/2)[(omega -/+ 2g S_x) p^2/(m omega)^2 + (omega +/- 2g S_x) x^2],
/// with the oscillator zero point removed so it matches build_dicke
/// entrywise. Requires homogeneous couplings.
FockOperator build_xp_form(const EffectiveParams& params, const HilbertSpec& spec);

/// Kinetic and potential curvature coefficients (1 -/+ 2(g/omega) s_x) in
/// units of omega for a fixed qubit projection s_x in [-1, 1], using the
/// plus-convention spin axis. The potential coefficient vanishing signals
/// spectral collapse; either coefficient negative signals unboundedness.
std::pair<double, double> curvature_report(const EffectiveParams& params, double s_x);

/// Interaction-picture bichromatic drive on one ion, both second-sideband
/// tones included, with the displacement exponential expanded to
/// `lamb_dicke_order` in eta. Terms are grouped by oscillation frequency
/// nu*(delta_n) + (omega_int - omega_tone).
TimeDependentHamiltonian build_ion_full(const PhysicalParams& p, const HilbertSpec& spec,
                                        int lamb_dicke_order = 2, int max_order = 4);

/// Second-order sideband model after the rotating-wave approximation:
/// terms of build_ion_full(order 2) whose oscillation frequency magnitude
/// is >= nu/2 are discarded.
TimeDependentHamiltonian build_rwa(const PhysicalParams& p, const HilbertSpec& spec);

/// Static Hamiltonian in the frame generated by
/// H0 = (delta_b - delta_r)/4 a^dag a + (delta_b + delta_r)/4 sigma_z,
/// obtained by transforming the RWA term list and subtracting H0. The result
/// must be time independent; a residual oscillation frequency throws.
FockOperator simulation_picture(const PhysicalParams& p, const HilbertSpec& spec);

/// The frame generator H0 above, as an operator.
FockOperator simulation_frame_generator(const PhysicalParams& p, const HilbertSpec& spec);

/// build_dicke with sigma_x -> sigma_y on the chosen site; evolving under it
/// maps the coupling expectation onto d<sigma_z^site>/dt at t = 0.
FockOperator build_measurement_h(const EffectiveParams& params, int site, const HilbertSpec& spec);

/// Leading spurious-excitation probabilities of the bichromatic drive and
/// the breathing-mode detunings of both tones (in units of nu).
struct ErrorBudget {
  double p_carrier;       // (Omega / 4 nu)^2
  double p_lamb_dicke;    // (eta Omega / 4 nu)^2
  double delta1_r, delta1_b;  // | |omega_tone - omega_int| - sqrt(3) nu | / nu
  double delta2_r, delta2_b;  // | |omega_tone - omega_int| - 2 sqrt(3) nu | / nu
};
ErrorBudget error_budget(const PhysicalParams& p);

}  // namespace tpr

#endif
