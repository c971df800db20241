#include "tpr/spectrum.hpp"

#include "tpr/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <future>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace tpr {

Complex parity_value(ParityLabel label) {
  switch (label) {
    case ParityLabel::plus_one: return {1.0, 0.0};
    case ParityLabel::minus_one: return {-1.0, 0.0};
    case ParityLabel::plus_i: return {0.0, 1.0};
    case ParityLabel::minus_i: return {0.0, -1.0};
    default: throw std::invalid_argument("parity_value: mixed state has no eigenvalue");
  }
}

std::string to_string(ParityLabel label) {
  switch (label) {
    case ParityLabel::plus_one: return "+1";
    case ParityLabel::minus_one: return "-1";
    case ParityLabel::plus_i: return "+i";
    case ParityLabel::minus_i: return "-i";
    default: return "mixed";
  }
}

ParityLabel nearest_parity_label(Complex value) {
  static const ParityLabel labels[4] = {ParityLabel::plus_one, ParityLabel::minus_one,
                                        ParityLabel::plus_i, ParityLabel::minus_i};
  ParityLabel best = labels[0];
  double best_dist = std::abs(value - parity_value(labels[0]));
  for (int i = 1; i < 4; ++i) {
    const double d = std::abs(value - parity_value(labels[i]));
    if (d < best_dist) {
      best_dist = d;
      best = labels[i];
    }
  }
  return best;
}

GeneralizedParity build_parity(const HilbertSpec& spec) {
  const Index dim = spec.dim();
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(dim);
  GeneralizedParity parity{spec, FockOperator(spec, SparseMatrix(dim, dim)), {}, {}};
  parity.basis_labels.resize(dim);
  const double sign_n = (spec.n_qubits % 2 == 0) ? 1.0 : -1.0;
  for (Index idx = 0; idx < dim; ++idx) {
    auto [bits, n] = spec.labels_of(idx);
    double qubit_product = 1.0;
    for (int q = 0; q < spec.n_qubits; ++q)
      if ((bits >> q) & 1) qubit_product = -qubit_product;  // bit set means |g>
    // i^n cycles with period 4.
    static const Complex i_pow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const Complex value = sign_n * qubit_product * i_pow[n % 4];
    trips.emplace_back(idx, idx, value);
    const ParityLabel label = nearest_parity_label(value);
    parity.basis_labels[idx] = label;
    parity.sectors[size_t(label)].push_back(idx);
  }
  SparseMatrix m(dim, dim);
  m.setFromTriplets(trips.begin(), trips.end());
  parity.op = FockOperator(spec, std::move(m));
  return parity;
}

ParityClassification classify(const Vector& eigenvector, const GeneralizedParity& parity) {
  if (eigenvector.size() != parity.spec.dim())
    throw std::invalid_argument("classify: vector dimension mismatch");
  const Complex s = eigenvector.dot(parity.op.matrix() * eigenvector);
  const double purity = std::abs(s);
  ParityClassification out{nearest_parity_label(s), purity, purity < 1.0 - 1e-8};
  if (out.mixed) out.label = ParityLabel::mixed;
  return out;
}

namespace {

bool is_effectively_real(const SparseMatrix& m, double scale) {
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      if (std::abs(it.value().imag()) > 1e-14 * scale) return false;
  return true;
}

// Dense Hermitian eigensolve of a sparse block, using the real solver when
// the block is real symmetric (all the two-photon Hamiltonians are).
void dense_hermitian_eig(const DenseMatrix& block, Eigen::VectorXd& values, DenseMatrix& vectors) {
  if (block.imag().cwiseAbs().maxCoeff() <= 1e-14 * (block.cwiseAbs().maxCoeff() + 1e-300)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block.real());
    if (es.info() != Eigen::Success) throw ConvergenceError("eigensystem: real solver failed");
    values = es.eigenvalues();
    vectors = es.eigenvectors().cast<Complex>();
  } else {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(block);
    if (es.info() != Eigen::Success) throw ConvergenceError("eigensystem: complex solver failed");
    values = es.eigenvalues();
    vectors = es.eigenvectors();
  }
}

double check_residuals(const FockOperator& h, const EigenSystem& sys) {
  if (sys.values.size() == 0) return 0.0;
  const double h_norm = std::max(std::abs(sys.values[0]),
                                 std::abs(sys.values[sys.values.size() - 1])) + 1e-300;
  double max_res = 0.0;
  for (Index j = 0; j < sys.vectors.cols(); ++j) {
    const Vector v = sys.vectors.col(j);
    max_res = std::max(max_res, (h.matrix() * v - sys.values[j] * v).norm());
  }
  if (max_res > 1e-10 * h_norm) {
    std::ostringstream os;
    os << "eigensystem: residual " << max_res << " exceeds 1e-10 * ||H|| = " << 1e-10 * h_norm;
    throw ConvergenceError(os.str());
  }
  return max_res;
}

}  // namespace

EigenSystem eigensystem(const FockOperator& h, int k) {
  if (k < 1 || k > h.spec().dim())
    throw std::invalid_argument("eigensystem: k out of range");
  if (h.hermiticity_defect() > 1e-12)
    throw std::invalid_argument("eigensystem: operator is not Hermitian");
  Eigen::VectorXd values;
  DenseMatrix vectors;
  dense_hermitian_eig(h.dense(), values, vectors);
  EigenSystem out;
  out.values = values.head(k);
  out.vectors = vectors.leftCols(k);
  out.max_residual = check_residuals(h, out);
  return out;
}

EigenSystem eigensystem(const FockOperator& h, const GeneralizedParity& parity, int k) {
  if (!(h.spec() == parity.spec))
    throw std::invalid_argument("eigensystem: operator/parity spec mismatch");
  if (k < 1 || k > h.spec().dim())
    throw std::invalid_argument("eigensystem: k out of range");

  const SparseMatrix& m = h.matrix();
  const double scale = h.max_abs_entry() + 1e-300;
  std::vector<int> sector_of(h.spec().dim());
  std::vector<Index> pos(h.spec().dim());
  for (int s = 0; s < 4; ++s)
    for (size_t i = 0; i < parity.sectors[s].size(); ++i) {
      sector_of[parity.sectors[s][i]] = s;
      pos[parity.sectors[s][i]] = Index(i);
    }

  // The Hamiltonian must be block diagonal over the four sectors.
  for (int col = 0; col < m.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(m, col); it; ++it)
      if (sector_of[it.row()] != sector_of[it.col()] && std::abs(it.value()) > 1e-10 * scale)
        throw std::invalid_argument("eigensystem: operator does not preserve the parity sectors");

  struct Level {
    double value;
    int sector;
    int rank;
  };
  std::vector<Level> levels;
  std::array<DenseMatrix, 4> sector_vectors;
  for (int s = 0; s < 4; ++s) {
    const auto& idx = parity.sectors[s];
    if (idx.empty()) continue;
    DenseMatrix block = DenseMatrix::Zero(idx.size(), idx.size());
    for (Index col : idx)
      for (SparseMatrix::InnerIterator it(m, int(col)); it; ++it)
        if (sector_of[it.row()] == s) block(pos[it.row()], pos[col]) = it.value();
    Eigen::VectorXd values;
    dense_hermitian_eig(block, values, sector_vectors[s]);
    for (Index j = 0; j < values.size(); ++j) levels.push_back({values[j], s, int(j)});
  }
  std::stable_sort(levels.begin(), levels.end(),
                   [](const Level& a, const Level& b) { return a.value < b.value; });

  EigenSystem out;
  const int kk = std::min<int>(k, int(levels.size()));
  out.values.resize(kk);
  out.vectors = DenseMatrix::Zero(h.spec().dim(), kk);
  for (int j = 0; j < kk; ++j) {
    const Level& lv = levels[j];
    out.values[j] = lv.value;
    const auto& idx = parity.sectors[lv.sector];
    for (size_t i = 0; i < idx.size(); ++i)
      out.vectors(idx[i], j) = sector_vectors[lv.sector](Index(i), lv.rank);
    static const ParityLabel order[4] = {ParityLabel::plus_one, ParityLabel::minus_one,
                                         ParityLabel::plus_i, ParityLabel::minus_i};
    out.labels.push_back(order[lv.sector]);
    out.sector_rank.push_back(lv.rank);
  }
  out.max_residual = check_residuals(h, out);
  return out;
}

namespace {

struct GridPointResult {
  std::vector<double> energies, mean_photon;
  std::vector<ParityLabel> labels;
  std::vector<int> sector_rank;
  std::vector<char> level_converged;
  bool converged = false;
  bool unbounded = false;
  int cutoff_used = 0;
};

std::vector<double> level_mean_photons(const EigenSystem& sys, const HilbertSpec& spec) {
  std::vector<double> out;
  for (Index j = 0; j < sys.vectors.cols(); ++j) {
    double n_mean = 0.0;
    for (Index i = 0; i < spec.dim(); ++i)
      n_mean += std::norm(sys.vectors(i, j)) * double(i % spec.boson_dim());
    out.push_back(n_mean);
  }
  return out;
}

GridPointResult sweep_point(const EffectiveParams& tmpl, double g, int k,
                            const SweepPolicy& policy) {
  GridPointResult res;
  EffectiveParams params = tmpl;
  params.g.assign(tmpl.n_qubits(), g);
  res.unbounded = g > 0.5 * params.omega * (1.0 + 1e-12);

  std::vector<double> prev_e, prev_n;
  for (size_t ci = 0; ci < policy.cutoff_schedule.size(); ++ci) {
    const int cutoff = policy.cutoff_schedule[ci];
    const HilbertSpec spec(tmpl.n_qubits(), cutoff);
    const GeneralizedParity parity = build_parity(spec);
    const FockOperator h = build_dicke(params, spec);
    const EigenSystem sys = eigensystem(h, parity, k);

    res.energies.assign(sys.values.data(), sys.values.data() + sys.values.size());
    res.labels = sys.labels;
    res.sector_rank = sys.sector_rank;
    res.mean_photon = level_mean_photons(sys, spec);
    res.cutoff_used = cutoff;
    res.level_converged.assign(res.energies.size(), 0);

    if (res.unbounded) break;  // never escalate or mark converged past collapse

    if (!prev_e.empty()) {
      bool all = true;
      for (size_t j = 0; j < res.energies.size(); ++j) {
        const bool e_ok = std::abs(res.energies[j] - prev_e[j]) <= policy.level_eps;
        const bool n_ok = std::abs(res.mean_photon[j] - prev_n[j]) <=
                          policy.photon_rel_eps * std::max(1.0, res.mean_photon[j]);
        res.level_converged[j] = e_ok && n_ok;
        all = all && res.level_converged[j];
      }
      if (all) {
        res.converged = true;
        break;
      }
    }
    prev_e = res.energies;
    prev_n = res.mean_photon;
  }
  return res;
}

int thread_budget() {
  if (const char* env = std::getenv("TPR_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

}  // namespace

SpectrumSweep sweep(const EffectiveParams& tmpl, const std::vector<double>& g_grid, int k,
                    const SweepPolicy& policy) {
  tmpl.validate();
  if (policy.cutoff_schedule.empty())
    throw std::invalid_argument("sweep: empty cutoff schedule");
  SpectrumSweep out;
  out.omega = tmpl.omega;
  out.omega_q = tmpl.omega_q;
  out.sign_convention = tmpl.sign_convention;
  out.g_grid = g_grid;

  std::vector<GridPointResult> results(g_grid.size());
  const int threads = thread_budget();
  if (threads <= 1) {
    for (size_t i = 0; i < g_grid.size(); ++i) results[i] = sweep_point(tmpl, g_grid[i], k, policy);
  } else {
    std::vector<std::future<void>> futures;
    std::atomic<size_t> next{0};
    for (int t = 0; t < threads; ++t)
      futures.push_back(std::async(std::launch::async, [&]() {
        for (size_t i = next.fetch_add(1); i < g_grid.size(); i = next.fetch_add(1))
          results[i] = sweep_point(tmpl, g_grid[i], k, policy);
      }));
    for (auto& f : futures) f.get();
  }

  for (auto& r : results) {
    out.energies.push_back(std::move(r.energies));
    out.parities.push_back(std::move(r.labels));
    out.sector_rank.push_back(std::move(r.sector_rank));
    out.mean_photon.push_back(std::move(r.mean_photon));
    out.level_converged.push_back(std::move(r.level_converged));
    out.converged.push_back(r.converged);
    out.unbounded_regime.push_back(r.unbounded);
    out.cutoff_used.push_back(r.cutoff_used);
  }
  return out;
}

CrossingReport analyze_crossings(const SpectrumSweep& sweep) {
  CrossingReport report{std::numeric_limits<double>::infinity(), 0, 0};
  // Smallest gap between in-sector neighbors anywhere on the grid.
  for (size_t gi = 0; gi < sweep.g_grid.size(); ++gi) {
    const auto& e = sweep.energies[gi];
    const auto& lab = sweep.parities[gi];
    for (size_t a = 0; a < e.size(); ++a)
      for (size_t b = a + 1; b < e.size(); ++b)
        if (lab[a] == lab[b]) {
          report.min_same_sector_gap = std::min(report.min_same_sector_gap, e[b] - e[a]);
          break;  // nearest in-sector neighbor above a
        }
  }
  // Order exchanges between adjacent grid points, levels identified by
  // (sector, rank-within-sector).
  auto key = [](ParityLabel l, int rank) { return int(l) * 100000 + rank; };
  for (size_t gi = 0; gi + 1 < sweep.g_grid.size(); ++gi) {
    const auto& e0 = sweep.energies[gi];
    const auto& e1 = sweep.energies[gi + 1];
    std::map<int, double> next_energy;
    for (size_t j = 0; j < e1.size(); ++j)
      next_energy[key(sweep.parities[gi + 1][j], sweep.sector_rank[gi + 1][j])] = e1[j];
    for (size_t a = 0; a < e0.size(); ++a)
      for (size_t b = a + 1; b < e0.size(); ++b) {
        const auto ka = key(sweep.parities[gi][a], sweep.sector_rank[gi][a]);
        const auto kb = key(sweep.parities[gi][b], sweep.sector_rank[gi][b]);
        if (!next_energy.count(ka) || !next_energy.count(kb)) continue;
        if (next_energy[ka] > next_energy[kb]) {
          if (sweep.parities[gi][a] == sweep.parities[gi][b])
            ++report.same_sector_swaps;
          else
            ++report.cross_sector_swaps;
        }
      }
  }
  return report;
}

std::string sweep_csv(const SpectrumSweep& sweep) {
  std::ostringstream os;
  os.precision(17);
  os << "g,level_index,energy,parity,mean_photon,converged\n";
  for (size_t gi = 0; gi < sweep.g_grid.size(); ++gi)
    for (size_t j = 0; j < sweep.energies[gi].size(); ++j)
      os << sweep.g_grid[gi] << ',' << j << ',' << sweep.energies[gi][j] << ','
         << to_string(sweep.parities[gi][j]) << ',' << sweep.mean_photon[gi][j] << ','
         << int(sweep.level_converged[gi][j]) << '\n';
  return os.str();
}

}  // namespace tpr
