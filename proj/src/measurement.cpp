#include "tpr/measurement.hpp"

#include "tpr/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace tpr {

namespace {

double sigma_expectation(const Vector& psi, const FockOperator& op) {
  return psi.dot(op.matrix() * psi).real();
}

}  // namespace

double derivative_symmetric(const QuantumState& state, const EffectiveParams& params, int site,
                            double fd_step) {
  if (state.kind() != StateKind::pure)
    throw std::invalid_argument("derivative_symmetric: pure state required");
  if (fd_step <= 0.0) throw std::invalid_argument("derivative_symmetric: fd_step must be positive");
  const HilbertSpec& spec = state.spec();
  const FockOperator h_m = build_measurement_h(params, site, spec);
  const HermitianPropagator prop(h_m);
  const FockOperator sz = qubit_op(spec, QubitAxis::z, site);
  const Vector& psi = state.vector();
  const double plus = sigma_expectation(prop.apply(fd_step, psi), sz);
  const double minus = sigma_expectation(prop.apply(-fd_step, psi), sz);
  // d<sigma_z>/dt at t=0 equals twice the coupling expectation.
  return 0.5 * (plus - minus) / (2.0 * fd_step);
}

DerivativeEstimate interaction_via_derivative(const QuantumState& state,
                                              const EffectiveParams& params, int site,
                                              double fd_step) {
  const HilbertSpec& spec = state.spec();
  const FockOperator h_m = build_measurement_h(params, site, spec);
  const HermitianPropagator prop(h_m);
  const double h_norm = std::max(std::abs(prop.eigenvalues().minCoeff()),
                                 std::abs(prop.eigenvalues().maxCoeff())) + 1e-300;
  const double h = fd_step > 0.0 ? fd_step : 1e-3 / h_norm;

  const double coarse = derivative_symmetric(state, params, site, h);
  const double fine = derivative_symmetric(state, params, site, 0.5 * h);
  const double extrapolated = (4.0 * fine - coarse) / 3.0;

  DerivativeEstimate est;
  est.fd_step = h;
  est.raw_value = coarse;
  est.value = extrapolated;
  est.richardson_error = std::abs(extrapolated - fine);
  const double floor = 1e-12 * h_norm;
  est.step_ok = std::abs(coarse - fine) <= 0.25 * std::abs(fine) + floor;
  if (std::abs(coarse - fine) > 4.0 * std::abs(fine) + floor)
    throw ConvergenceError(
        "interaction_via_derivative: fd_step too large, Richardson halving disagrees");
  return est;
}

ParityDecomposition ParityDecomposition::standard() {
  ParityDecomposition d;
  const double phi = M_PI / 2.0;
  d.terms = {
      {+1.0, QubitAxis::x, QubitAxis::z, phi, Complex(-0.5, 0.0)},
      {-1.0, QubitAxis::x, QubitAxis::z, phi, Complex(-0.5, 0.0)},
      {+1.0, QubitAxis::x, QubitAxis::y, phi, Complex(0.0, +0.5)},
      {-1.0, QubitAxis::x, QubitAxis::y, phi, Complex(0.0, -0.5)},
  };
  return d;
}

FockOperator decomposition_operator(const ParityDecomposition& decomposition,
                                    const HilbertSpec& spec) {
  if (spec.n_qubits != 1)
    throw std::invalid_argument("decomposition_operator: defined for N = 1");
  DenseMatrix sum = DenseMatrix::Zero(spec.dim(), spec.dim());
  const FockOperator n_op = number_op(spec);
  for (const auto& term : decomposition.terms) {
    const FockOperator gen = n_op * qubit_op(spec, term.rotation_axis, 0);
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(gen.dense());
    Vector phases(es.eigenvalues().size());
    for (Index i = 0; i < phases.size(); ++i)
      phases[i] = std::polar(1.0, term.sign * term.phase * es.eigenvalues()[i]);
    const DenseMatrix rot =
        es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    sum += term.weight * rot * qubit_op(spec, term.measured_axis, 0).dense();
  }
  return FockOperator(spec, sum.sparseView());
}

Complex parity_via_protocol(const QuantumState& state, const ParityDecomposition& decomposition) {
  if (state.spec().n_qubits != 1)
    throw std::invalid_argument("parity_via_protocol: defined for N = 1");
  if (state.kind() != StateKind::pure)
    throw std::invalid_argument("parity_via_protocol: pure state required");
  const HilbertSpec& spec = state.spec();
  const FockOperator n_op = number_op(spec);
  Complex acc = 0.0;
  for (const auto& term : decomposition.terms) {
    const FockOperator gen =
        Complex(term.sign, 0.0) * (n_op * qubit_op(spec, term.rotation_axis, 0));
    const HermitianPropagator prop(gen);
    const Vector evolved = prop.apply(0.5 * term.phase, state.vector());
    acc += term.weight * sigma_expectation(evolved, qubit_op(spec, term.measured_axis, 0));
  }
  return acc;
}

DispersiveModel dispersive_effective(double delta, double Omega0, double eta, double phase,
                                     const HilbertSpec& spec, double ratio_min) {
  if (spec.n_qubits != 1)
    throw std::invalid_argument("dispersive_effective: defined for N = 1");
  if (delta == 0.0) throw std::invalid_argument("dispersive_effective: delta must be nonzero");
  const double lambda = 0.5 * Omega0 * eta;
  const double rate = lambda * lambda / delta;

  DispersiveModel model{delta,
                        lambda,
                        rate,
                        phase,
                        TimeDependentHamiltonian(spec),
                        identity_op(spec),
                        identity_op(spec),
                        identity_op(spec),
                        identity_op(spec),
                        false,
                        0.0};

  const SparseMatrix a = boson_destroy(spec.fock_cutoff);
  const SparseMatrix x_op = SparseMatrix(a + SparseMatrix(a.adjoint()));
  model.full = TimeDependentHamiltonian(spec);
  model.full.add_harmonic_pair(lambda * std::polar(1.0, phase), delta,
                               kron(pauli(QubitAxis::plus).sparseView(), x_op), 0, +1);

  const FockOperator sz = qubit_op(spec, QubitAxis::z, 0);
  const FockOperator id = identity_op(spec);
  const FockOperator n_op = number_op(spec);
  FockOperator x2(spec, kron(sparse_identity(2), SparseMatrix(x_op * x_op)));
  model.h_eff = Complex(rate, 0.0) * (x2 * sz);
  model.number_shift = Complex(rate, 0.0) * ((Complex(2.0, 0.0) * n_op + id) * sz);
  model.squeeze_part = model.h_eff - model.number_shift;
  model.carrier_compensation = Complex(-0.5 * Omega0 * eta, 0.0) * sz;
  model.regime_ok = std::abs(delta) >= ratio_min * std::abs(lambda);
  model.predicted_error = std::abs(lambda / delta);
  return model;
}

DispersiveValidation validate_dispersive(const DispersiveModel& model, const QuantumState& psi0,
                                         double window, double tol) {
  if (psi0.kind() != StateKind::pure)
    throw std::invalid_argument("validate_dispersive: pure state required");
  DispersiveValidation out;
  out.window = window > 0.0 ? window : 0.25 * M_PI / std::abs(model.rate);

  EvolveOptions opts;
  opts.tol = tol;
  opts.keep_states = true;
  const EvolutionResult full =
      evolve_td(model.full, psi0, {0.0, out.window}, {}, opts);
  const Vector& psi_full = full.states.back().vector();

  const Vector eff = HermitianPropagator(model.h_eff).apply(out.window, psi0.vector());
  const Vector diag = HermitianPropagator(model.number_shift).apply(out.window, psi0.vector());
  out.fidelity_h_eff = std::norm(eff.dot(psi_full));
  out.fidelity_number_shift = std::norm(diag.dot(psi_full));
  return out;
}

Complex parity_via_protocol(const QuantumState& state, const ParityDecomposition& decomposition,
                            const DispersiveSettings& settings) {
  if (state.spec().n_qubits != 1)
    throw std::invalid_argument("parity_via_protocol: defined for N = 1");
  const HilbertSpec& spec = state.spec();
  const double abs_delta = std::abs(settings.delta);
  if (abs_delta == 0.0) throw std::invalid_argument("parity_via_protocol: delta must be nonzero");

  const HermitianPropagator rot_y(qubit_op(spec, QubitAxis::y, 0));
  const HermitianPropagator rot_x(qubit_op(spec, QubitAxis::x, 0));

  Complex acc = 0.0;
  for (const auto& term : decomposition.terms) {
    // Realize exp(-i sign n sigma_z t*) by the dispersive construction: the
    // detuning sign selects the sign of the shift, the carrier compensation
    // removes the n-independent part.
    const double t_star = 0.5 * term.phase;
    const DispersiveModel model = dispersive_effective(
        term.sign * abs_delta, settings.Omega0, settings.eta, settings.phase, spec);
    const double tau = t_star / (2.0 * std::abs(model.rate));
    const double tau_comp = t_star / (settings.Omega0 * settings.eta);
    const FockOperator compensation =
        Complex(term.sign, 0.0) * model.carrier_compensation;

    Vector psi = state.vector();
    switch (term.rotation_axis) {
      case QubitAxis::x: psi = rot_y.apply(-M_PI / 4.0, psi); break;  // e^{+i sy pi/4}
      case QubitAxis::y: psi = rot_x.apply(M_PI / 4.0, psi); break;   // e^{-i sx pi/4}
      case QubitAxis::z: break;
      default: throw std::invalid_argument("parity_via_protocol: rotation axis must be x, y or z");
    }
    psi = HermitianPropagator(model.h_eff).apply(tau, psi);
    psi = HermitianPropagator(compensation).apply(tau_comp, psi);
    switch (term.rotation_axis) {
      case QubitAxis::x: psi = rot_y.apply(M_PI / 4.0, psi); break;
      case QubitAxis::y: psi = rot_x.apply(-M_PI / 4.0, psi); break;
      default: break;
    }
    acc += term.weight * sigma_expectation(psi, qubit_op(spec, term.measured_axis, 0));
  }
  return acc;
}

}  // namespace tpr
