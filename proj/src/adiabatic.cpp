#include "tpr/adiabatic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tpr {

namespace {

struct SectorEig {
  Eigen::VectorXd values;
  DenseMatrix vectors;  // full-space columns, sector-supported
};

// Diagonalizes one generalized-parity block of h and lifts the eigenvectors
// back to the full space.
SectorEig sector_eigensystem(const FockOperator& h, const GeneralizedParity& parity, int sector) {
  const auto& idx = parity.sectors[sector];
  DenseMatrix block = DenseMatrix::Zero(idx.size(), idx.size());
  std::vector<Index> pos(h.spec().dim(), -1);
  for (size_t i = 0; i < idx.size(); ++i) pos[idx[i]] = Index(i);
  const SparseMatrix& m = h.matrix();
  for (Index col : idx)
    for (SparseMatrix::InnerIterator it(m, int(col)); it; ++it)
      if (pos[it.row()] >= 0) block(pos[it.row()], pos[col]) = it.value();

  SectorEig out;
  DenseMatrix block_vectors;
  const double scale = block.cwiseAbs().maxCoeff() + 1e-300;
  if (block.imag().cwiseAbs().maxCoeff() <= 1e-14 * scale) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block.real());
    out.values = es.eigenvalues();
    block_vectors = es.eigenvectors().cast<Complex>();
  } else {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(block);
    out.values = es.eigenvalues();
    block_vectors = es.eigenvectors();
  }
  out.vectors = DenseMatrix::Zero(h.spec().dim(), idx.size());
  for (Index j = 0; j < Index(idx.size()); ++j)
    for (size_t i = 0; i < idx.size(); ++i)
      out.vectors(idx[i], j) = block_vectors(Index(i), j);
  return out;
}

}  // namespace

Index decoupled_eigenstate_basis_index(const EffectiveParams& tmpl, const HilbertSpec& spec,
                                       int index) {
  tmpl.validate();
  if (tmpl.n_qubits() != spec.n_qubits)
    throw std::invalid_argument("decoupled_eigenstate_basis_index: qubit count mismatch");
  struct Entry {
    double energy;
    Index basis;
  };
  std::vector<Entry> entries;
  for (int bits = 0; bits < spec.qubit_dim(); ++bits) {
    double qubit_energy = 0.0;
    for (int q = 0; q < spec.n_qubits; ++q) {
      const bool ground = (bits >> (spec.n_qubits - 1 - q)) & 1;
      qubit_energy += (ground ? -0.5 : 0.5) * tmpl.omega_q[q];
    }
    for (int m = 0; m <= spec.fock_cutoff; ++m)
      entries.push_back({tmpl.omega * m + qubit_energy, spec.index_of(bits, m)});
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.energy < b.energy; });
  if (index < 0 || index >= int(entries.size()))
    throw std::invalid_argument("decoupled_eigenstate_basis_index: index out of range");
  return entries[index].basis;
}

RampResult run_ramp(const RampSchedule& schedule, const EffectiveParams& tmpl,
                    const HilbertSpec& spec, double tol, int n_checkpoints) {
  tmpl.validate();
  if (schedule.duration <= 0.0) throw std::invalid_argument("run_ramp: duration must be positive");
  if (schedule.g_start < 0.0 || schedule.g_end < 0.0)
    throw std::invalid_argument("run_ramp: couplings must be nonnegative");
  if (schedule.g_end >= 0.5 * tmpl.omega)
    throw std::invalid_argument("run_ramp: ramp into g >= omega/2 rejected (collapse region)");
  if (n_checkpoints < 2) throw std::invalid_argument("run_ramp: need at least two checkpoints");

  EffectiveParams zero_g = tmpl;
  zero_g.g.assign(tmpl.n_qubits(), 0.0);
  EffectiveParams unit_g = tmpl;
  unit_g.g.assign(tmpl.n_qubits(), 1.0);

  const FockOperator h_base = build_dicke(zero_g, spec);
  const FockOperator coupling_op = build_dicke(unit_g, spec) - h_base;
  const GeneralizedParity parity = build_parity(spec);

  const double g0 = schedule.g_start, g1 = schedule.g_end, T = schedule.duration;
  auto g_of_t = [g0, g1, T](double t) { return g0 + (g1 - g0) * std::clamp(t / T, 0.0, 1.0); };

  TimeDependentHamiltonian h_t(spec);
  h_t.add_harmonic({Complex(1.0, 0.0), 0.0, h_base.matrix(), 0, 0});
  h_t.add_control(g_of_t, coupling_op.matrix());

  const Index start_idx = decoupled_eigenstate_basis_index(tmpl, spec, schedule.initial_state_index);
  Vector psi0 = Vector::Zero(spec.dim());
  psi0[start_idx] = 1.0;
  const int sector = int(parity.basis_labels[start_idx]);
  const Complex parity0 = parity_value(parity.basis_labels[start_idx]);

  EvolveOptions opts;
  opts.tol = tol;
  opts.keep_states = true;
  const std::vector<double> grid = linspace(0.0, T, n_checkpoints);
  EvolutionResult evo = evolve_td(h_t, QuantumState::pure(spec, psi0), grid, {}, opts);

  RampResult res;
  res.initial_index = schedule.initial_state_index;
  res.sector = parity.basis_labels[start_idx];
  res.duration = T;
  res.stats = evo.stats;

  Vector target = psi0;
  for (int i = 0; i < n_checkpoints; ++i) {
    const double t = grid[i];
    const double g = g_of_t(t);
    EffectiveParams params = tmpl;
    params.g.assign(tmpl.n_qubits(), g);
    const FockOperator h = build_dicke(params, spec);
    const SectorEig eig = sector_eigensystem(h, parity, sector);

    // Track the instantaneous eigenstate by maximal overlap with the
    // previous target; within one sector the assignment is unambiguous.
    Index best = 0;
    double best_overlap = 0.0;
    for (Index j = 0; j < eig.vectors.cols(); ++j) {
      const double ov = std::abs(eig.vectors.col(j).dot(target));
      if (ov > best_overlap) {
        best_overlap = ov;
        best = j;
      }
    }
    target = eig.vectors.col(best);

    const Vector& psi = evo.states[i].vector();
    const double fid = std::norm(target.dot(psi));
    const Complex pi_exp = psi.dot(parity.op.matrix() * psi);
    res.times.push_back(t);
    res.coupling.push_back(g);
    res.fidelity.push_back(fid);
    res.energy.push_back(psi.dot(h.matrix() * psi).real());
    res.parity_re.push_back(pi_exp.real());
    res.parity_im.push_back(pi_exp.imag());
    res.parity_drift = std::max(res.parity_drift, std::abs(pi_exp - parity0));

    if (i == n_checkpoints - 1) {
      res.final_fidelity = fid;
      // Global energy rank of the tracked level at the final coupling.
      const double e_target = eig.values[best];
      int rank = 0;
      for (int s = 0; s < 4; ++s) {
        if (parity.sectors[s].empty()) continue;
        const SectorEig other = s == sector ? eig : sector_eigensystem(h, parity, s);
        for (Index j = 0; j < other.values.size(); ++j)
          if (other.values[j] < e_target - 1e-12 ||
              (s < sector && std::abs(other.values[j] - e_target) <= 1e-12))
            ++rank;
      }
      res.final_index = rank;
    }
  }
  return res;
}

std::vector<std::pair<double, double>> duration_ladder(const RampSchedule& schedule,
                                                       const EffectiveParams& tmpl,
                                                       const HilbertSpec& spec, double tol,
                                                       int n_durations) {
  std::vector<std::pair<double, double>> out;
  RampSchedule s = schedule;
  for (int i = 0; i < n_durations; ++i) {
    const RampResult r = run_ramp(s, tmpl, spec, tol);
    out.emplace_back(s.duration, r.final_fidelity);
    s.duration *= 2.0;
  }
  return out;
}

}  // namespace tpr
