#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tpr/spectrum.hpp"

#include <algorithm>
#include <random>

using namespace tpr;

namespace {

// Direct factor evaluation of the generalized parity on a product state.
Complex parity_factor_oracle(const HilbertSpec& spec, int bits, int n) {
  Complex value = (spec.n_qubits % 2 == 0) ? 1.0 : -1.0;
  for (int q = 0; q < spec.n_qubits; ++q) value *= ((bits >> q) & 1) ? -1.0 : 1.0;
  const Complex i_pow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return value * i_pow[n % 4];
}

}  // namespace

TEST_CASE("generalized parity: factor values, unitarity, fourth power") {
  const HilbertSpec spec(1, 9);
  const GeneralizedParity parity = build_parity(spec);

  // Pi|g,2> = -|g,2> and Pi|e,0> = -|e,0>: the two-phonon exchange partners
  // share a sector.
  Vector g2 = Vector::Zero(spec.dim());
  g2[spec.index_of(1, 2)] = 1.0;
  CHECK((parity.op.apply(g2) + g2).norm() < 1e-15);
  Vector e0 = Vector::Zero(spec.dim());
  e0[spec.index_of(0, 0)] = 1.0;
  CHECK((parity.op.apply(e0) + e0).norm() < 1e-15);
  CHECK(parity.basis_labels[spec.index_of(1, 2)] == ParityLabel::minus_one);
  CHECK(parity.basis_labels[spec.index_of(0, 0)] == ParityLabel::minus_one);

  // every diagonal value matches the factor oracle
  for (Index i = 0; i < spec.dim(); ++i) {
    auto [bits, n] = spec.labels_of(i);
    CHECK(std::abs(parity.op.dense()(i, i) - parity_factor_oracle(spec, bits, n)) < 1e-15);
  }

  // unitary with Pi^4 = 1
  const DenseMatrix pd = parity.op.dense();
  CHECK((pd * pd.adjoint() - DenseMatrix::Identity(spec.dim(), spec.dim())).cwiseAbs().maxCoeff() <
        1e-14);
  const DenseMatrix p4 = pd * pd * pd * pd;
  CHECK((p4 - DenseMatrix::Identity(spec.dim(), spec.dim())).cwiseAbs().maxCoeff() < 1e-14);

  // sectors partition the basis
  size_t total = 0;
  for (const auto& s : parity.sectors) total += s.size();
  CHECK(total == size_t(spec.dim()));
}

TEST_CASE("classification of product and superposition states") {
  const HilbertSpec spec(1, 8);
  const GeneralizedParity parity = build_parity(spec);

  Vector g0 = Vector::Zero(spec.dim());
  g0[spec.index_of(1, 0)] = 1.0;
  CHECK(classify(g0, parity).label == ParityLabel::plus_one);

  Vector e1 = Vector::Zero(spec.dim());
  e1[spec.index_of(0, 1)] = 1.0;
  CHECK(classify(e1, parity).label == ParityLabel::minus_i);

  // random vector inside one sector keeps its label
  std::mt19937 rng(17);
  std::normal_distribution<double> n01(0.0, 1.0);
  Vector in_sector = Vector::Zero(spec.dim());
  for (Index idx : parity.sectors[size_t(ParityLabel::plus_i)])
    in_sector[idx] = Complex(n01(rng), n01(rng));
  in_sector.normalize();
  const ParityClassification c = classify(in_sector, parity);
  CHECK(c.label == ParityLabel::plus_i);
  CHECK(c.purity == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(c.mixed);

  // cross-sector superposition is flagged mixed
  Vector mixed = (g0 + e1) / std::sqrt(2.0);
  CHECK(classify(mixed, parity).mixed);
}

TEST_CASE("eigensystem: decoupled levels match the closed form") {
  const EffectiveParams params = EffectiveParams::single(1.0, 1.9, 0.0);
  const HilbertSpec spec(1, 30);
  const FockOperator h = build_dicke(params, spec);
  const EigenSystem sys = eigensystem(h, 6);
  // omega n +/- omega_q/2 sorted: -0.95, 0.05, 0.95, 1.05, 1.95, 2.05
  const double expected[6] = {-0.95, 0.05, 0.95, 1.05, 1.95, 2.05};
  for (int i = 0; i < 6; ++i)
    CHECK(sys.values[i] == doctest::Approx(expected[i]).epsilon(1e-13));
  CHECK(sys.max_residual <= 1e-10 * 30.95);

  CHECK_THROWS_AS(eigensystem(h, 0), std::invalid_argument);
  CHECK_THROWS_AS(eigensystem(h, int(spec.dim()) + 1), std::invalid_argument);
}

TEST_CASE("sector solver agrees with the dense solver and labels cleanly") {
  const EffectiveParams params = EffectiveParams::single(1.0, 1.9, 0.3);
  const HilbertSpec spec(1, 60);
  const FockOperator h = build_dicke(params, spec);
  const GeneralizedParity parity = build_parity(spec);
  const EigenSystem plain = eigensystem(h, 12);
  const EigenSystem sectored = eigensystem(h, parity, 12);
  for (int i = 0; i < 12; ++i) {
    CHECK(sectored.values[i] == doctest::Approx(plain.values[i]).epsilon(1e-12));
    // labels are consistent with direct classification of the eigenvector
    const ParityClassification c = classify(sectored.vectors.col(i), parity);
    CHECK(c.label == sectored.labels[i]);
    CHECK_FALSE(c.mixed);
  }

  // the basis reordered by sectors block-diagonalizes H: off-block entries
  // vanish identically
  const SparseMatrix& m = h.matrix();
  std::vector<int> sector_of(spec.dim());
  for (int s = 0; s < 4; ++s)
    for (Index idx : parity.sectors[s]) sector_of[idx] = s;
  double off_block = 0.0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      if (sector_of[it.row()] != sector_of[it.col()])
        off_block = std::max(off_block, std::abs(it.value()));
  CHECK(off_block <= 1e-12 * h.max_abs_entry());
}

TEST_CASE("cutoff doubling leaves converged levels fixed at g = 0.3") {
  const EffectiveParams params = EffectiveParams::single(1.0, 1.9, 0.3);
  const HilbertSpec small(1, 100), large(1, 200);
  const EigenSystem a = eigensystem(build_dicke(params, small), build_parity(small), 10);
  const EigenSystem b = eigensystem(build_dicke(params, large), build_parity(large), 10);
  for (int i = 0; i < 10; ++i) CHECK(std::abs(a.values[i] - b.values[i]) < 1e-8);
}

TEST_CASE("spectrum is invariant under the coupling sign convention") {
  for (int n_qubits : {1, 2}) {
    const HilbertSpec spec(n_qubits, 40);
    const EffectiveParams minus =
        EffectiveParams::homogeneous(n_qubits, 1.0, 1.9, 0.35, SignConvention::minus);
    EffectiveParams plus = minus;
    plus.sign_convention = SignConvention::plus;
    const EigenSystem a = eigensystem(build_dicke(minus, spec), 8);
    const EigenSystem b = eigensystem(build_dicke(plus, spec), 8);
    for (int i = 0; i < 8; ++i)
      CHECK(std::abs(a.values[i] - b.values[i]) < 1e-10 * std::max(1.0, std::abs(a.values[i])));
  }
}

TEST_CASE("sweep: gap shrinkage, photon growth, crossings") {
  const EffectiveParams tmpl = EffectiveParams::single(1.0, 1.9, 0.0);
  SweepPolicy policy;
  policy.cutoff_schedule = {100, 200, 400, 800};
  std::vector<double> grid;
  for (double g = 0.0; g < 0.47; g += 0.049) grid.push_back(g);
  grid.push_back(0.49);
  const SpectrumSweep sw = sweep(tmpl, grid, 8, policy);

  const size_t i01 = 2;    // g = 0.098 ~ 0.1
  const size_t i03 = 6;    // g = 0.294 ~ 0.3
  const size_t last = grid.size() - 1;  // g = 0.49
  CHECK(sw.converged[i01]);
  CHECK(sw.converged[i03]);
  CHECK(sw.converged[last]);

  // energy spacing shrinks toward the collapse point
  const double gap_01 = sw.energies[i01][1] - sw.energies[i01][0];
  const double gap_49 = sw.energies[last][1] - sw.energies[last][0];
  CHECK(gap_49 < 0.2 * gap_01);

  // photon number of the low eigenstates grows without bound
  CHECK(sw.mean_photon[last][1] > 5.0 * sw.mean_photon[i03][1]);

  // crossings only between different sectors
  const CrossingReport report = analyze_crossings(sw);
  CHECK(report.same_sector_swaps == 0);
  CHECK(report.cross_sector_swaps >= 1);
  CHECK(report.min_same_sector_gap > 1e-3);

  // the CSV export parses back with the right shape
  const std::string csv = sweep_csv(sw);
  CHECK(csv.find("g,level_index,energy,parity,mean_photon,converged") == 0);
}

TEST_CASE("sweep refuses converged labels beyond the collapse point") {
  const EffectiveParams tmpl = EffectiveParams::single(1.0, 1.9, 0.0);
  SweepPolicy policy;
  policy.cutoff_schedule = {60, 120};
  const SpectrumSweep sw = sweep(tmpl, {0.3, 0.6}, 4, policy);
  CHECK_FALSE(sw.unbounded_regime[0]);
  CHECK(sw.unbounded_regime[1]);
  CHECK_FALSE(sw.converged[1]);
  for (char c : sw.level_converged[1]) CHECK_FALSE(bool(c));
  CHECK(sw.cutoff_used[1] == 60);  // no escalation past collapse
}

TEST_CASE("N = 3 sweep returns four-sector labels") {
  const EffectiveParams tmpl = EffectiveParams::homogeneous(3, 1.0, 1.9, 0.0);
  SweepPolicy policy;
  policy.cutoff_schedule = {40, 80};
  const SpectrumSweep sw = sweep(tmpl, {0.1, 0.3}, 12, policy);
  CHECK(sw.converged[0]);
  std::set<ParityLabel> seen;
  for (const auto& labels : sw.parities)
    for (ParityLabel l : labels) seen.insert(l);
  CHECK(seen.size() == 4);
}
