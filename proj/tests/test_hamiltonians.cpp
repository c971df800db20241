#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tpr/hamiltonians.hpp"
#include "tpr/spectrum.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <random>

using namespace tpr;

namespace {

constexpr double TWO_PI = 6.283185307179586476925286766559;

DenseMatrix kron_reference(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

DenseMatrix pair_term_dense(int cutoff) {
  DenseMatrix a = DenseMatrix::Zero(cutoff + 1, cutoff + 1);
  for (int n = 1; n <= cutoff; ++n) a(n - 1, n) = std::sqrt(double(n));
  DenseMatrix a2 = a * a;
  return a2 + a2.adjoint().eval();
}

double rel_max_diff(const DenseMatrix& a, const DenseMatrix& b) {
  const double scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()) + 1e-300;
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

TEST_CASE("decoupled spectrum is omega n +/- omega_q/2") {
  const EffectiveParams params = EffectiveParams::single(1.0, 1.9, 0.0);
  const HilbertSpec spec(1, 4);
  const FockOperator h = build_dicke(params, spec);
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h.dense());

  std::vector<double> expected;
  for (int n = 0; n <= 4; ++n) {
    expected.push_back(1.0 * n + 0.95);
    expected.push_back(1.0 * n - 0.95);
  }
  std::sort(expected.begin(), expected.end());
  for (Index i = 0; i < es.eigenvalues().size(); ++i)
    CHECK(es.eigenvalues()[i] == doctest::Approx(expected[i]).epsilon(1e-14));
}

TEST_CASE("coupling matrix element <e,0|H|g,2> = -g sqrt(2) in the minus convention") {
  const double g = 0.137;
  const EffectiveParams params = EffectiveParams::single(1.0, 2.0, g);
  const HilbertSpec spec(1, 5);
  const FockOperator h = build_dicke(params, spec);
  const DenseMatrix hd = h.dense();
  const Complex elem = hd(spec.index_of(0, 0), spec.index_of(1, 2));
  // Reference: brute-force product of factor entries.
  const DenseMatrix ref = kron_reference(DenseMatrix(pauli(QubitAxis::x)), pair_term_dense(5));
  const Complex expected = -g * ref(spec.index_of(0, 0), spec.index_of(1, 2));
  CHECK(std::abs(elem - expected) < 1e-14);
  CHECK(std::abs(elem - Complex(-g * std::sqrt(2.0), 0.0)) < 1e-14);
}

TEST_CASE("N = 2 interaction carries the 1/N prefactor entrywise") {
  const double g = 0.21;
  const EffectiveParams params = EffectiveParams::homogeneous(2, 1.0, 1.9, g);
  const HilbertSpec spec(2, 4);
  EffectiveParams decoupled = params;
  decoupled.g = {0.0, 0.0};
  const DenseMatrix coupling =
      build_dicke(params, spec).dense() - build_dicke(decoupled, spec).dense();

  const DenseMatrix id2 = DenseMatrix::Identity(2, 2);
  const DenseMatrix sx = DenseMatrix(pauli(QubitAxis::x));
  const DenseMatrix pair = pair_term_dense(4);
  const DenseMatrix expected =
      -(g / 2.0) * (kron_reference(kron_reference(sx, id2), pair) +
                    kron_reference(kron_reference(id2, sx), pair));
  CHECK(rel_max_diff(coupling, expected) < 1e-14);
}

TEST_CASE("every built operator is Hermitian and commutes with the parity") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const int n_qubits = 1 + trial % 3;
    const EffectiveParams params = EffectiveParams::homogeneous(
        n_qubits, 1.0, 0.5 + 2.0 * u(rng), 0.49 * u(rng),
        trial % 2 ? SignConvention::plus : SignConvention::minus);
    const HilbertSpec spec(n_qubits, 8);
    const FockOperator h = build_dicke(params, spec);
    CHECK(h.hermiticity_defect() <= 1e-12);
    const GeneralizedParity parity = build_parity(spec);
    const double comm = commutator(h, parity.op).frobenius_norm();
    CHECK(comm <= 1e-12 * h.frobenius_norm());
  }
}

TEST_CASE("position/momentum form equals the ladder form entrywise") {
  for (int n_qubits : {1, 3}) {
    for (auto sc : {SignConvention::minus, SignConvention::plus}) {
      const EffectiveParams params = EffectiveParams::homogeneous(n_qubits, 1.0, 1.9, 0.37, sc);
      const HilbertSpec spec(n_qubits, 10);
      const FockOperator a = build_dicke(params, spec);
      const FockOperator b = build_xp_form(params, spec);
      CHECK(rel_max_diff(a.dense(), b.dense()) < 1e-10);
    }
  }
  EffectiveParams inhomogeneous = EffectiveParams::homogeneous(2, 1.0, 1.9, 0.3);
  inhomogeneous.g[1] = 0.1;
  const HilbertSpec spec2(2, 4);
  CHECK_THROWS_AS(build_xp_form(inhomogeneous, spec2), std::invalid_argument);
}

TEST_CASE("curvature coefficients flag collapse and unboundedness") {
  // flat potential at the collapse coupling
  auto [kin_c, pot_c] = curvature_report(EffectiveParams::single(1.0, 1.9, 0.5), -1.0);
  CHECK(pot_c == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(kin_c == doctest::Approx(2.0));

  // free oscillator
  auto [kin0, pot0] = curvature_report(EffectiveParams::single(1.0, 1.9, 0.0), 0.7);
  CHECK(kin0 == doctest::Approx(1.0));
  CHECK(pot0 == doctest::Approx(1.0));

  // past collapse one curvature goes negative at full polarization
  auto [kin_p, pot_p] = curvature_report(EffectiveParams::single(1.0, 1.9, 0.6), 1.0);
  CHECK(std::min(kin_p, pot_p) < 0.0);
  auto [kin_m, pot_m] = curvature_report(EffectiveParams::single(1.0, 1.9, 0.6), -1.0);
  CHECK(std::min(kin_m, pot_m) < 0.0);

  CHECK_THROWS_AS(curvature_report(EffectiveParams::single(1.0, 1.9, 0.1), 1.5),
                  std::invalid_argument);
}

TEST_CASE("parameter map: forward values") {
  PhysicalParams p;
  p.nu = TWO_PI * 1e6;
  p.eta = 0.04;
  p.Omega = TWO_PI * 1e5;
  p.delta_r = 0.0;
  p.delta_b = 0.0;
  const EffectiveParams e = params_to_effective(p);
  CHECK(e.g[0] == doctest::Approx(TWO_PI * 40.0).epsilon(1e-12));
  CHECK(e.omega == 0.0);  // both sidebands resonant
  CHECK(e.omega_q[0] == 0.0);
}

TEST_CASE("parameter map: inversion reproduces the target detunings") {
  // target g = 0.01 omega, omega_q = 2 omega -> delta_r = 0, delta_b = -4 omega
  const double omega = TWO_PI * 4000.0;
  const EffectiveParams e = EffectiveParams::single(omega, 2.0 * omega, 0.01 * omega);
  const PhysicalParams p = effective_to_params(e, TWO_PI * 1e6, 0.04, std::nullopt);
  CHECK(std::abs(p.delta_r) < 1e-9);
  CHECK(p.delta_b == doctest::Approx(-4.0 * omega).epsilon(1e-12));
  CHECK(p.Omega == doctest::Approx(4.0 * e.g[0] / (0.04 * 0.04)).epsilon(1e-12));
}

TEST_CASE("parameter map: round trip and linearity") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    EffectiveParams e;
    e.omega = 0.5 + std::abs(u(rng));
    e.omega_q = {2.0 * u(rng)};
    e.g = {0.3 * std::abs(u(rng)) + 1e-3};
    e.sign_convention = SignConvention::minus;
    const bool pin_eta = trial % 2 == 0;
    const PhysicalParams p = pin_eta ? effective_to_params(e, 50.0, 0.04, std::nullopt)
                                     : effective_to_params(e, 50.0, std::nullopt, 100.0);
    const EffectiveParams back = params_to_effective(p);
    CHECK(back.omega == doctest::Approx(e.omega).epsilon(1e-12));
    CHECK(back.omega_q[0] == doctest::Approx(e.omega_q[0]).epsilon(1e-12));
    CHECK(back.g[0] == doctest::Approx(e.g[0]).epsilon(1e-12));
  }
  // linear in the detunings
  PhysicalParams p1, p2;
  p1.delta_r = 0.3;
  p1.delta_b = -0.9;
  p2.delta_r = -1.1;
  p2.delta_b = 0.4;
  PhysicalParams sum = p1;
  sum.delta_r += p2.delta_r;
  sum.delta_b += p2.delta_b;
  CHECK(params_to_effective(sum).omega ==
        doctest::Approx(params_to_effective(p1).omega + params_to_effective(p2).omega));
  CHECK(params_to_effective(sum).omega_q[0] ==
        doctest::Approx(params_to_effective(p1).omega_q[0] + params_to_effective(p2).omega_q[0]));

  const EffectiveParams e = EffectiveParams::single(1.0, 2.0, 0.01);
  CHECK_THROWS_AS(effective_to_params(e, 50.0, std::nullopt, std::nullopt),
                  std::invalid_argument);
  CHECK_THROWS_AS(effective_to_params(e, 50.0, 0.04, 100.0), std::invalid_argument);
}

TEST_CASE("full drive: preconditions") {
  PhysicalParams p;
  p.nu = TWO_PI * 1e6;
  p.eta = 0.04;
  p.Omega = TWO_PI * 1e5;
  const HilbertSpec spec(1, 6);
  CHECK_THROWS_AS(build_ion_full(p, spec, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_ion_full(p, spec, 5), std::invalid_argument);
  const HilbertSpec two_qubits(2, 6);
  CHECK_THROWS_AS(build_ion_full(p, two_qubits, 2), std::invalid_argument);
}

TEST_CASE("full drive at eta = 0 reduces to the bare carrier") {
  PhysicalParams p;
  p.nu = TWO_PI * 1e6;
  p.eta = 0.0;
  p.Omega = TWO_PI * 1e5;
  p.phi_r = 0.3;
  p.phi_b = -1.1;
  const HilbertSpec spec(1, 4);
  const auto h = build_ion_full(p, spec, 2);
  const DenseMatrix at0 = h.evaluate(0.0).dense();
  const Complex pref = 0.5 * p.Omega * (std::polar(1.0, p.phi_r) + std::polar(1.0, p.phi_b));
  DenseMatrix expected =
      kron_reference(pref * DenseMatrix(pauli(QubitAxis::plus)), DenseMatrix::Identity(5, 5));
  expected += expected.adjoint().eval();
  CHECK(rel_max_diff(at0, expected) < 1e-14);
}

TEST_CASE("full drive is Hermitian at random times") {
  PhysicalParams p;
  p.nu = TWO_PI * 1e6;
  p.eta = 0.04;
  p.Omega = TWO_PI * 1e5;
  p.delta_b = -TWO_PI * 16000.0;
  const HilbertSpec spec(1, 8);
  const auto h = build_ion_full(p, spec, 4);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1e-3);
  for (int i = 0; i < 20; ++i) {
    const double t = u(rng);
    CHECK(h.evaluate(t).hermiticity_defect() <= 1e-12);
  }
  // evaluate and apply_into agree
  Vector x = Vector::Random(spec.dim());
  x.normalize();
  Vector y;
  const double t = 2.7e-4;
  h.apply_into(t, x, y);
  CHECK((h.evaluate(t).apply(x) - y).norm() < 1e-9 * y.norm());
}

TEST_CASE("RWA filter reproduces the second-order sideband Hamiltonian") {
  PhysicalParams p;
  p.nu = TWO_PI * 1e6;
  p.eta = 0.04;
  p.Omega = TWO_PI * 1e5;
  p.delta_r = TWO_PI * 700.0;
  p.delta_b = -TWO_PI * 16000.0;
  const HilbertSpec spec(1, 6);
  const auto rwa = build_rwa(p, spec);

  // Reference: -(eta^2 Omega/4)[a^2 e^{-i dr t} + a^dag^2 e^{-i db t}] s+ + H.c.
  DenseMatrix a = DenseMatrix::Zero(7, 7);
  for (int n = 1; n <= 6; ++n) a(n - 1, n) = std::sqrt(double(n));
  const DenseMatrix a2 = a * a;
  const DenseMatrix sp = DenseMatrix(pauli(QubitAxis::plus));
  const double c = -p.eta * p.eta * p.Omega / 4.0;
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1e-3);
  for (int i = 0; i < 10; ++i) {
    const double t = u(rng);
    DenseMatrix expected = kron_reference(
        c * sp, a2 * std::polar(1.0, -p.delta_r * t) +
                    a2.adjoint() * std::polar(1.0, -p.delta_b * t));
    expected += expected.adjoint().eval();
    CHECK(rel_max_diff(rwa.evaluate(t).dense(), expected) < 1e-12);
  }

  // zero drive gives the zero operator
  PhysicalParams off = p;
  off.Omega = 0.0;
  CHECK(build_rwa(off, spec).evaluate(1e-4).frobenius_norm() == 0.0);

  // resonant sidebands make it time independent
  PhysicalParams resonant = p;
  resonant.delta_r = resonant.delta_b = 0.0;
  const auto static_rwa = build_rwa(resonant, spec);
  CHECK(rel_max_diff(static_rwa.evaluate(0.0).dense(), static_rwa.evaluate(3.3e-4).dense()) <
        1e-13);
}

TEST_CASE("simulation picture equals the effective model to 1e-12") {
  PhysicalParams p;
  p.nu = TWO_PI * 1e6;
  p.eta = 0.04;
  p.Omega = TWO_PI * 1e5;
  p.delta_r = 0.0;
  p.delta_b = -TWO_PI * 16000.0;
  const HilbertSpec spec(1, 12);
  const FockOperator h_sim = simulation_picture(p, spec);
  const FockOperator h_eff = build_dicke(params_to_effective(p), spec);
  CHECK(rel_max_diff(h_sim.dense(), h_eff.dense()) < 1e-12);

  Eigen::SelfAdjointEigenSolver<DenseMatrix> a(h_sim.dense()), b(h_eff.dense());
  CHECK((a.eigenvalues() - b.eigenvalues()).cwiseAbs().maxCoeff() <
        1e-12 * std::abs(b.eigenvalues()[0]) + 1e-12);
}

TEST_CASE("error budget: spurious excitations and breathing-mode detunings") {
  PhysicalParams p;
  p.nu = TWO_PI * 1e6;
  p.eta = 0.04;
  p.Omega = TWO_PI * 1e5;
  const ErrorBudget b = error_budget(p);
  CHECK(b.p_carrier == doctest::Approx(6.25e-4).epsilon(1e-12));
  CHECK(b.p_lamb_dicke == doctest::Approx(1e-6).epsilon(1e-12));
  CHECK(b.delta1_r == doctest::Approx(2.0 - std::sqrt(3.0)).epsilon(1e-12));
  CHECK(b.delta1_b == doctest::Approx(2.0 - std::sqrt(3.0)).epsilon(1e-12));
  CHECK(b.delta2_r == doctest::Approx(2.0 * std::sqrt(3.0) - 2.0).epsilon(1e-12));
  CHECK(b.delta2_b == doctest::Approx(2.0 * std::sqrt(3.0) - 2.0).epsilon(1e-12));
}

TEST_CASE("measurement Hamiltonian splits into commuting and anticommuting parts") {
  const EffectiveParams params = EffectiveParams::single(1.0, 1.9, 0.23);
  const HilbertSpec spec(1, 8);
  const FockOperator h_m = build_measurement_h(params, 0, spec);
  EffectiveParams decoupled = params;
  decoupled.g = {0.0};
  const FockOperator a_part = build_dicke(decoupled, spec);
  const FockOperator b_part = h_m - a_part;
  const FockOperator sz = qubit_op(spec, QubitAxis::z, 0);
  CHECK(commutator(a_part, sz).frobenius_norm() < 1e-13);
  CHECK(anticommutator(b_part, sz).frobenius_norm() < 1e-13);

  // g = 0 reduces to the bare model
  CHECK(rel_max_diff(build_measurement_h(decoupled, 0, spec).dense(), a_part.dense()) == 0.0);
  CHECK_THROWS_AS(build_measurement_h(params, 1, spec), std::invalid_argument);

  // axis swap on the chosen site only
  const HilbertSpec spec2(2, 5);
  const EffectiveParams params2 = EffectiveParams::homogeneous(2, 1.0, 1.9, 0.23);
  const FockOperator hm2 = build_measurement_h(params2, 1, spec2);
  const DenseMatrix diff = hm2.dense() - build_dicke(params2, spec2).dense();
  const DenseMatrix pair = pair_term_dense(5);
  const DenseMatrix id2 = DenseMatrix::Identity(2, 2);
  const DenseMatrix expected =
      -(params2.g[1] / 2.0) *
      kron_reference(kron_reference(id2, DenseMatrix(pauli(QubitAxis::y)) -
                                             DenseMatrix(pauli(QubitAxis::x))),
                     pair);
  CHECK(rel_max_diff(diff, expected) < 1e-13);
}
