#include "tpr/hamiltonians.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace tpr {

TimeDependentHamiltonian TimeDependentHamiltonian::from_static(const FockOperator& h) {
  TimeDependentHamiltonian td(h.spec());
  td.add_harmonic({Complex(1.0, 0.0), 0.0, h.matrix(), 0, 0});
  return td;
}

void TimeDependentHamiltonian::add_harmonic(HarmonicTerm term) {
  if (term.op.rows() != spec_.dim() || term.op.cols() != spec_.dim())
    throw std::invalid_argument("TimeDependentHamiltonian: term dimension mismatch");
  terms_.push_back(std::move(term));
}

void TimeDependentHamiltonian::add_harmonic_pair(Complex coeff, double freq,
                                                 const SparseMatrix& op, int delta_n,
                                                 int qubit_sign) {
  add_harmonic({coeff, freq, op, delta_n, qubit_sign});
  add_harmonic({std::conj(coeff), -freq, SparseMatrix(op.adjoint()), -delta_n, -qubit_sign});
}

void TimeDependentHamiltonian::add_control(std::function<double(double)> coeff, SparseMatrix op) {
  if (op.rows() != spec_.dim() || op.cols() != spec_.dim())
    throw std::invalid_argument("TimeDependentHamiltonian: control dimension mismatch");
  controls_.push_back({std::move(coeff), std::move(op)});
}

std::optional<double> TimeDependentHamiltonian::period_hint() const {
  double fmax = 0.0;
  for (const auto& t : terms_) fmax = std::max(fmax, std::abs(t.freq));
  if (fmax == 0.0) return std::nullopt;
  return 2.0 * M_PI / fmax;
}

FockOperator TimeDependentHamiltonian::evaluate(double t) const {
  SparseMatrix sum(spec_.dim(), spec_.dim());
  for (const auto& term : terms_)
    sum += SparseMatrix((term.coeff * std::polar(1.0, term.freq * t)) * term.op);
  for (const auto& ctrl : controls_) sum += SparseMatrix(Complex(ctrl.coeff(t), 0.0) * ctrl.op);
  return FockOperator(spec_, std::move(sum));
}

void TimeDependentHamiltonian::apply_into(double t, const Vector& x, Vector& y) const {
  y.setZero(x.size());
  for (const auto& term : terms_)
    y.noalias() += (term.coeff * std::polar(1.0, term.freq * t)) * (term.op * x);
  for (const auto& ctrl : controls_) y.noalias() += Complex(ctrl.coeff(t), 0.0) * (ctrl.op * x);
}

namespace {

SparseMatrix two_photon_coupling(const HilbertSpec& spec) {
  const SparseMatrix a = boson_destroy(spec.fock_cutoff);
  SparseMatrix a2 = SparseMatrix(a * a);
  return SparseMatrix(a2 + SparseMatrix(a2.adjoint()));
}

FockOperator dicke_with_axes(const EffectiveParams& params, const HilbertSpec& spec,
                             const std::vector<QubitAxis>& axes) {
  params.validate();
  if (params.n_qubits() != spec.n_qubits)
    throw std::invalid_argument("build_dicke: params/spec qubit count mismatch");
  const double s = params.sign_convention == SignConvention::minus ? -1.0 : 1.0;
  const int n = spec.n_qubits;

  FockOperator h = Complex(params.omega, 0.0) * number_op(spec);
  const SparseMatrix pair_op = two_photon_coupling(spec);
  const SparseMatrix id_boson = sparse_identity(spec.boson_dim());
  const SparseMatrix id2 = sparse_identity(2);
  for (int q = 0; q < n; ++q) {
    h += Complex(0.5 * params.omega_q[q], 0.0) * qubit_op(spec, QubitAxis::z, q);
    SparseMatrix sq = sparse_identity(1);
    const SparseMatrix sig = pauli(axes[q]).sparseView();
    for (int j = 0; j < n; ++j) sq = kron(sq, j == q ? sig : id2);
    FockOperator coupling(spec, kron(sq, pair_op));
    h += Complex(s * params.g[q] / n, 0.0) * coupling;
  }
  return h;
}

}  // namespace

FockOperator build_dicke(const EffectiveParams& params, const HilbertSpec& spec) {
  return dicke_with_axes(params, spec, std::vector<QubitAxis>(spec.n_qubits, QubitAxis::x));
}

FockOperator build_measurement_h(const EffectiveParams& params, int site, const HilbertSpec& spec) {
  if (site < 0 || site >= spec.n_qubits)
    throw std::invalid_argument("build_measurement_h: site out of range");
  std::vector<QubitAxis> axes(spec.n_qubits, QubitAxis::x);
  axes[site] = QubitAxis::y;
  return dicke_with_axes(params, spec, axes);
}

FockOperator build_xp_form(const EffectiveParams& params, const HilbertSpec& spec) {
  params.validate();
  if (params.n_qubits() != spec.n_qubits)
    throw std::invalid_argument("build_xp_form: params/spec qubit count mismatch");
  const double g = params.g[0];
  for (double gi : params.g)
    if (gi != g) throw std::invalid_argument("build_xp_form: couplings must be homogeneous");
  const double s = params.sign_convention == SignConvention::minus ? -1.0 : 1.0;
  const double omega = params.omega;
  const int n = spec.n_qubits;

  const SparseMatrix a = boson_destroy(spec.fock_cutoff);
  const SparseMatrix id_q = sparse_identity(spec.qubit_dim());
  // x^2 and p^2 as exact restrictions of the infinite-space operators
  // (squaring the truncated a +/- a^dag would corrupt the edge row): with
  // m = 1, x^2 = (a^2 + a^dag^2 + 2n + 1)/(2 omega) and
  // p^2 = (omega/2)(2n + 1 - a^2 - a^dag^2).
  SparseMatrix a2 = SparseMatrix(a * a);
  SparseMatrix pair = SparseMatrix(a2 + SparseMatrix(a2.adjoint()));
  SparseMatrix two_n_plus_1(spec.boson_dim(), spec.boson_dim());
  {
    std::vector<Eigen::Triplet<Complex>> trips;
    for (int n = 0; n <= spec.fock_cutoff; ++n) trips.emplace_back(n, n, 2.0 * n + 1.0);
    two_n_plus_1.setFromTriplets(trips.begin(), trips.end());
  }
  FockOperator x2(spec, kron(id_q, SparseMatrix(Complex(0.5 / omega, 0.0) *
                                                SparseMatrix(pair + two_n_plus_1))));
  FockOperator p2(spec, kron(id_q, SparseMatrix(Complex(0.5 * omega, 0.0) *
                                                SparseMatrix(two_n_plus_1 - pair))));

  FockOperator sx_collective = Complex(0.0, 0.0) * identity_op(spec);
  for (int q = 0; q < n; ++q) sx_collective += Complex(1.0 / n, 0.0) * qubit_op(spec, QubitAxis::x, q);

  const FockOperator id = identity_op(spec);
  FockOperator kin_coeff = Complex(omega, 0.0) * id - Complex(s * 2.0 * g, 0.0) * sx_collective;
  FockOperator pot_coeff = Complex(omega, 0.0) * id + Complex(s * 2.0 * g, 0.0) * sx_collective;

  FockOperator h = Complex(0.5 / omega, 0.0) * (kin_coeff * p2) +
                   Complex(0.5 * omega, 0.0) * (pot_coeff * x2);
  for (int q = 0; q < n; ++q)
    h += Complex(0.5 * params.omega_q[q], 0.0) * qubit_op(spec, QubitAxis::z, q);
  // Drop the zero point so the normal-ordered form is recovered exactly.
  h -= Complex(0.5 * omega, 0.0) * id;
  return h;
}

std::pair<double, double> curvature_report(const EffectiveParams& params, double s_x) {
  params.validate();
  if (s_x < -1.0 || s_x > 1.0)
    throw std::invalid_argument("curvature_report: s_x must lie in [-1, 1]");
  const double g = params.g[0];
  for (double gi : params.g)
    if (gi != g) throw std::invalid_argument("curvature_report: couplings must be homogeneous");
  const double gbar = g / params.omega;
  return {1.0 - 2.0 * gbar * s_x, 1.0 + 2.0 * gbar * s_x};
}

TimeDependentHamiltonian build_ion_full(const PhysicalParams& p, const HilbertSpec& spec,
                                        int lamb_dicke_order, int max_order) {
  if (spec.n_qubits != 1)
    throw std::invalid_argument("build_ion_full: the drive model is defined for a single ion");
  if (lamb_dicke_order < 2)
    throw std::invalid_argument("build_ion_full: expansion order < 2 drops all two-phonon terms");
  if (lamb_dicke_order > max_order)
    throw std::invalid_argument("build_ion_full: expansion order exceeds configured maximum");
  if (p.nu <= 0.0) throw std::invalid_argument("build_ion_full: nu must be positive");

  const int d = spec.boson_dim();
  const SparseMatrix a = boson_destroy(spec.fock_cutoff);
  const SparseMatrix ad = SparseMatrix(a.adjoint());

  // Expand exp(i eta (a e^{-i nu t} + a^dag e^{i nu t})) as a sum over ordered
  // ladder words, grouped by delta_n = (#creations - #annihilations); every
  // word in a group oscillates at nu*delta_n.
  std::map<int, SparseMatrix> groups;
  Complex prefactor(1.0, 0.0);  // (i eta)^m / m!
  for (int m = 0; m <= lamb_dicke_order; ++m) {
    if (m > 0) prefactor *= I_UNIT * p.eta / double(m);
    for (int bits = 0; bits < (1 << m); ++bits) {
      SparseMatrix word = sparse_identity(d);
      int delta_n = 0;
      for (int k = 0; k < m; ++k) {
        const bool creation = (bits >> k) & 1;
        word = SparseMatrix(word * (creation ? ad : a));
        delta_n += creation ? 1 : -1;
      }
      word = SparseMatrix(prefactor * word);
      auto [it, inserted] = groups.emplace(delta_n, word);
      if (!inserted) it->second += word;
    }
  }

  const SparseMatrix sigma_plus = pauli(QubitAxis::plus).sparseView();
  TimeDependentHamiltonian td(spec);
  struct Tone {
    double offset;  // omega_int - omega_tone
    double phase;
  };
  const Tone tones[2] = {{2.0 * p.nu - p.delta_r, p.phi_r}, {-2.0 * p.nu - p.delta_b, p.phi_b}};
  for (const Tone& tone : tones) {
    for (const auto& [delta_n, word] : groups) {
      SparseMatrix op = kron(sigma_plus, word);
      op.prune([](Index, Index, const Complex& v) { return std::abs(v) > 0.0; });
      if (op.nonZeros() == 0) continue;
      const Complex coeff = 0.5 * p.Omega * std::polar(1.0, tone.phase);
      td.add_harmonic_pair(coeff, p.nu * delta_n + tone.offset, op, delta_n, +1);
    }
  }
  return td;
}

TimeDependentHamiltonian build_rwa(const PhysicalParams& p, const HilbertSpec& spec) {
  const TimeDependentHamiltonian full = build_ion_full(p, spec, 2);
  TimeDependentHamiltonian td(spec);
  for (const auto& term : full.harmonic_terms())
    if (std::abs(term.freq) < 0.5 * p.nu) td.add_harmonic(term);
  return td;
}

FockOperator simulation_frame_generator(const PhysicalParams& p, const HilbertSpec& spec) {
  const double alpha = 0.25 * (p.delta_b - p.delta_r);
  const double beta = 0.25 * (p.delta_b + p.delta_r);
  return Complex(alpha, 0.0) * number_op(spec) + Complex(beta, 0.0) * qubit_op(spec, QubitAxis::z, 0);
}

FockOperator simulation_picture(const PhysicalParams& p, const HilbertSpec& spec) {
  const TimeDependentHamiltonian rwa = build_rwa(p, spec);
  const double alpha = 0.25 * (p.delta_b - p.delta_r);
  const double beta = 0.25 * (p.delta_b + p.delta_r);
  const double tol = std::max(1e-6, 1e-12 * p.nu);

  SparseMatrix sum(spec.dim(), spec.dim());
  for (const auto& term : rwa.harmonic_terms()) {
    const double residual = term.freq + alpha * term.delta_n + 2.0 * beta * term.qubit_sign;
    if (std::abs(residual) > tol)
      throw std::runtime_error("simulation_picture: term remains time dependent in this frame");
    sum += SparseMatrix(term.coeff * term.op);
  }
  FockOperator h(spec, std::move(sum));
  h -= simulation_frame_generator(p, spec);
  return h;
}

ErrorBudget error_budget(const PhysicalParams& p) {
  if (p.nu <= 0.0) throw std::invalid_argument("error_budget: nu must be positive");
  ErrorBudget b{};
  const double r = p.Omega / (4.0 * p.nu);
  b.p_carrier = r * r;
  b.p_lamb_dicke = (p.eta * r) * (p.eta * r);
  const double sep_r = std::abs(-2.0 * p.nu + p.delta_r);  // |omega_r - omega_int|
  const double sep_b = std::abs(2.0 * p.nu + p.delta_b);
  const double breathing = std::sqrt(3.0) * p.nu;
  b.delta1_r = std::abs(sep_r - breathing) / p.nu;
  b.delta1_b = std::abs(sep_b - breathing) / p.nu;
  b.delta2_r = std::abs(sep_r - 2.0 * breathing) / p.nu;
  b.delta2_b = std::abs(sep_b - 2.0 * breathing) / p.nu;
  return b;
}

}  // namespace tpr
