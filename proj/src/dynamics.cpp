#include "tpr/dynamics.hpp"

#include "tpr/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace tpr {

namespace {

void check_grid(const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw std::invalid_argument("evolution: empty time grid");
  for (size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1]))
      throw std::invalid_argument("evolution: time grid must be strictly increasing");
}

// Embedded Dormand-Prince 5(4) pair with FSAL. `StateT` is an Eigen vector
// or matrix of complex doubles; `rhs(t, y, dydt)` fills the derivative.
// `tol` is an end-to-end budget for the run of total length `span`: each
// step is accepted against tol * h / span, so the accumulated error stays
// near tol regardless of the step count.
template <class StateT, class Rhs>
void rk45_advance(Rhs&& rhs, StateT& y, double t0, double t1, double tol, double span,
                  double max_h, IntegratorStats& stats) {
  static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                      a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                      a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                      b6 = 11.0 / 84;
  static const double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695, e4 = b4 - 393.0 / 640,
                      e5 = b5 + 92097.0 / 339200, e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

  if (t1 <= t0) return;
  StateT k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y, ytmp = y, ynew = y;
  rhs(t0, y, k1);
  ++stats.rhs_evaluations;

  double t = t0;
  const double segment = t1 - t0;
  const double f0 = k1.cwiseAbs().maxCoeff();
  double h = std::min({max_h, segment, f0 > 0.0 ? 0.1 / f0 : segment});
  const double h_min = std::max(std::abs(t1), std::abs(t0)) * 1e-15 + 1e-300;

  while (t < t1) {
    h = std::min(h, t1 - t);
    if (h < h_min) {
      std::ostringstream os;
      os << "rk45: step size underflow at t = " << t << " (stiffness or conflicting tolerances)";
      throw ConvergenceError(os.str());
    }

    ytmp = y + h * a21 * k1;
    rhs(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    rhs(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + h, ytmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(t + h, ynew, k7);
    stats.rhs_evaluations += 6;

    const StateT err_state =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double tol_step = tol * (h / span);
    const auto scale =
        (tol_step + tol_step * y.cwiseAbs().cwiseMax(ynew.cwiseAbs()).array()).matrix().eval();
    const double err =
        std::sqrt((err_state.cwiseAbs().array() / scale.array()).square().mean());

    if (err <= 1.0) {
      t += h;
      y.swap(ynew);
      k1.swap(k7);  // first-same-as-last
      ++stats.steps_accepted;
      stats.max_local_error = std::max(stats.max_local_error, err * tol_step);
      stats.min_step = stats.min_step == 0.0 ? h : std::min(stats.min_step, h);
    } else {
      ++stats.steps_rejected;
    }
    // err scales as h^4 against the h-proportional budget.
    const double factor = 0.9 * std::pow(std::max(err, 1e-10), -0.25);
    h *= std::clamp(factor, 0.2, 5.0);
    h = std::min(h, max_h);
  }
}

std::vector<std::vector<double>> make_traces(size_t n_obs) {
  return std::vector<std::vector<double>>(n_obs);
}

void record_pure(EvolutionResult& res, const std::vector<Observable>& observables,
                 const HilbertSpec& spec, const Vector& psi, bool keep, double state_tol) {
  for (size_t i = 0; i < observables.size(); ++i) {
    const Complex val = psi.dot(observables[i].op.matrix() * psi);
    res.observables[i].push_back(observables[i].imaginary_part ? val.imag() : val.real());
  }
  if (keep) res.states.push_back(QuantumState::pure(spec, psi / psi.norm(), state_tol));
}

void record_density(EvolutionResult& res, const std::vector<Observable>& observables,
                    const HilbertSpec& spec, const DenseMatrix& rho, bool keep,
                    double state_tol, IntegratorStats& stats) {
  for (size_t i = 0; i < observables.size(); ++i) {
    const Complex val = (observables[i].op.matrix() * rho).trace();
    res.observables[i].push_back(observables[i].imaginary_part ? val.imag() : val.real());
  }
  DenseMatrix herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(herm, Eigen::EigenvaluesOnly);
  stats.min_density_eigenvalue =
      std::min(stats.min_density_eigenvalue, es.eigenvalues().minCoeff());
  if (keep)
    res.states.push_back(QuantumState::density(spec, herm / herm.trace().real(), state_tol));
}

void validate_observables(const std::vector<Observable>& observables, const HilbertSpec& spec) {
  for (const auto& o : observables)
    if (!(o.op.spec() == spec))
      throw std::invalid_argument("evolution: observable '" + o.name + "' has mismatched spec");
}

void init_result(EvolutionResult& res, const std::vector<Observable>& observables) {
  res.observables = make_traces(observables.size());
  for (const auto& o : observables) res.observable_names.push_back(o.name);
}

}  // namespace

std::vector<double> linspace(double t0, double t1, int n) {
  if (n < 2) throw std::invalid_argument("linspace: need at least two points");
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = t0 + (t1 - t0) * double(i) / double(n - 1);
  return out;
}

Complex expectation(const FockOperator& op, const QuantumState& state) {
  if (!(op.spec() == state.spec()))
    throw std::invalid_argument("expectation: operator/state dimension mismatch");
  if (state.kind() == StateKind::pure) {
    const Vector& psi = state.vector();
    return psi.dot(op.matrix() * psi);
  }
  return (op.matrix() * state.matrix()).trace();
}

HermitianPropagator::HermitianPropagator(const FockOperator& h, double herm_tol) {
  if (h.hermiticity_defect() > herm_tol)
    throw std::invalid_argument("HermitianPropagator: operator is not Hermitian");
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h.dense());
  if (es.info() != Eigen::Success)
    throw ConvergenceError("HermitianPropagator: eigendecomposition failed");
  evals_ = es.eigenvalues();
  evecs_ = es.eigenvectors();
}

Vector HermitianPropagator::apply(double t, const Vector& v) const {
  Vector coeffs = evecs_.adjoint() * v;
  for (Index i = 0; i < coeffs.size(); ++i) coeffs[i] *= std::polar(1.0, -evals_[i] * t);
  return evecs_ * coeffs;
}

DenseMatrix HermitianPropagator::unitary(double t) const {
  Vector phases(evals_.size());
  for (Index i = 0; i < evals_.size(); ++i) phases[i] = std::polar(1.0, -evals_[i] * t);
  return evecs_ * phases.asDiagonal() * evecs_.adjoint();
}

Vector krylov_propagate(const SparseMatrix& h, const Vector& v, double t, double tol, int m_max,
                        IntegratorStats* stats) {
  const Index n = v.size();
  if (h.rows() != n || h.cols() != n)
    throw std::invalid_argument("krylov_propagate: dimension mismatch");
  if (t == 0.0 || v.norm() == 0.0) return v;
  const double sign = t >= 0.0 ? 1.0 : -1.0;
  const double total = std::abs(t);
  double remaining = total;
  Vector cur = v;

  IntegratorStats local;
  IntegratorStats& st = stats ? *stats : local;

  while (remaining > 1e-15 * total) {
    const double beta = cur.norm();
    const int m_cap = int(std::min<Index>(m_max, n));

    // Hermitian Lanczos with full reorthogonalization.
    std::vector<Vector> basis;
    basis.reserve(m_cap);
    std::vector<double> alpha, betas;
    basis.push_back(cur / beta);
    double beta_res = 0.0;
    Vector w;
    for (int j = 0; j < m_cap; ++j) {
      w = h * basis[j];
      ++st.rhs_evaluations;
      if (j > 0) w -= betas[j - 1] * basis[j - 1];
      const double a = (basis[j].dot(w)).real();
      alpha.push_back(a);
      w -= a * basis[j];
      for (const Vector& b : basis) w -= b.dot(w) * b;  // reorthogonalize
      beta_res = w.norm();
      if (j + 1 == m_cap) break;
      if (beta_res < 1e-14 * beta) {  // happy breakdown: subspace is invariant
        beta_res = 0.0;
        break;
      }
      betas.push_back(beta_res);
      basis.push_back(w / beta_res);
    }
    const int m = int(alpha.size());

    Eigen::MatrixXd tmat = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      tmat(i, i) = alpha[i];
      if (i + 1 < m) tmat(i, i + 1) = tmat(i + 1, i) = betas[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tmat);
    // Extended matrix exposes the first neglected component for the
    // per-substep error estimate.
    Eigen::MatrixXd text = Eigen::MatrixXd::Zero(m + 1, m + 1);
    text.topLeftCorner(m, m) = tmat;
    text(m, m - 1) = text(m - 1, m) = beta_res;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_ext(text);

    auto propagate_small = [&](const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>& dec,
                               double tau) {
      const Eigen::MatrixXd& u = dec.eigenvectors();
      Vector phases(u.rows());
      for (Index i = 0; i < u.rows(); ++i)
        phases[i] = std::polar(1.0, -sign * tau * dec.eigenvalues()[i]);
      Vector e1 = Vector::Zero(u.rows());
      e1[0] = 1.0;
      return Vector(u.cast<Complex>() * (phases.array() * (u.transpose().cast<Complex>() * e1).array()).matrix());
    };

    double tau = remaining;
    if (beta_res > 0.0) {
      for (int halvings = 0;; ++halvings) {
        const Vector w_ext = propagate_small(es_ext, tau);
        const double err = beta * beta_res * std::abs(w_ext[m]) * tau;
        const double budget = tol * (tau / total);
        if (err <= budget || halvings > 60) {
          if (halvings > 60) {
            std::ostringstream os;
            os << "krylov_propagate: no convergence (residual " << err << " at tau " << tau << ")";
            throw ConvergenceError(os.str());
          }
          st.max_local_error = std::max(st.max_local_error, err);
          break;
        }
        tau *= 0.5;
      }
    }

    const Vector u_small = propagate_small(es, tau);
    Vector next = Vector::Zero(n);
    for (int j = 0; j < m; ++j) next += (beta * u_small[j]) * basis[j];
    cur.swap(next);
    remaining -= tau;
    ++st.steps_accepted;
  }
  return cur;
}

EvolutionResult evolve_const(const FockOperator& h, const QuantumState& psi0,
                             const std::vector<double>& t_grid, ConstMethod method,
                             const std::vector<Observable>& observables,
                             const EvolveOptions& opts) {
  check_grid(t_grid);
  validate_observables(observables, h.spec());
  if (psi0.kind() != StateKind::pure)
    throw std::invalid_argument("evolve_const: initial state must be pure");
  if (h.hermiticity_defect() > 1e-12)
    throw std::invalid_argument("evolve_const: Hamiltonian is not Hermitian");

  EvolutionResult res;
  init_result(res, observables);
  res.times = t_grid;
  const double state_tol = std::max(1e-10, 20.0 * opts.tol);

  if (method == ConstMethod::eig) {
    HermitianPropagator prop(h);
    const Vector& psi_init = psi0.vector();
    for (double t : t_grid) {
      Vector psi = prop.apply(t - t_grid.front(), psi_init);
      res.stats.norm_drift = std::max(res.stats.norm_drift, std::abs(psi.norm() - 1.0));
      record_pure(res, observables, h.spec(), psi, opts.keep_states, state_tol);
    }
  } else {
    Vector psi = psi0.vector();
    const double total_span = t_grid.back() - t_grid.front();
    for (size_t i = 0; i < t_grid.size(); ++i) {
      if (i > 0) {
        const double dt = t_grid[i] - t_grid[i - 1];
        const double seg_tol = total_span > 0.0 ? opts.tol * (dt / total_span) : opts.tol;
        psi = krylov_propagate(h.matrix(), psi, dt, seg_tol, opts.krylov_dim, &res.stats);
      }
      res.stats.norm_drift = std::max(res.stats.norm_drift, std::abs(psi.norm() - 1.0));
      record_pure(res, observables, h.spec(), psi, opts.keep_states, state_tol);
    }
  }
  return res;
}

EvolutionResult evolve_td(const TimeDependentHamiltonian& h, const QuantumState& psi0,
                          const std::vector<double>& t_grid,
                          const std::vector<Observable>& observables,
                          const EvolveOptions& opts) {
  check_grid(t_grid);
  validate_observables(observables, h.spec());
  if (psi0.kind() != StateKind::pure)
    throw std::invalid_argument("evolve_td: initial state must be pure");

  EvolutionResult res;
  init_result(res, observables);
  res.times = t_grid;
  const double state_tol = std::max(1e-10, 20.0 * opts.tol);

  // The fastest drive period bounds the step so oscillations are never
  // aliased away by the error controller.
  double max_h = std::numeric_limits<double>::infinity();
  if (auto period = h.period_hint()) max_h = *period / 30.0;

  const double total_span = t_grid.back() - t_grid.front();
  Vector psi = psi0.vector();
  Vector buf(psi.size());
  auto rhs = [&h, &buf](double t, const Vector& y, Vector& dydt) {
    h.apply_into(t, y, buf);
    dydt = Complex(0.0, -1.0) * buf;
  };

  for (size_t i = 0; i < t_grid.size(); ++i) {
    if (i > 0)
      rk45_advance(rhs, psi, t_grid[i - 1], t_grid[i], opts.tol, total_span, max_h,
                   res.stats);
    const double drift = std::abs(psi.norm() - 1.0);
    res.stats.norm_drift = std::max(res.stats.norm_drift, drift);
    if (drift > 10.0 * opts.tol) {
      std::ostringstream os;
      os << "evolve_td: norm drift " << drift << " exceeds 10*tol at t = " << t_grid[i];
      throw ConvergenceError(os.str());
    }
    record_pure(res, observables, h.spec(), psi, opts.keep_states, state_tol);
  }
  return res;
}

namespace {

SparseMatrix vectorized_liouvillian(const FockOperator& h,
                                    const std::vector<LindbladChannel>& channels) {
  const Index d = h.spec().dim();
  const SparseMatrix id = sparse_identity(d);
  const SparseMatrix hm = h.matrix();
  SparseMatrix liou = SparseMatrix(Complex(0.0, -1.0) *
                                   (kron(id, hm) - kron(SparseMatrix(hm.transpose()), id)));
  for (const auto& ch : channels) {
    if (ch.rate < 0.0) throw std::invalid_argument("evolve_lindblad: negative rate");
    if (!(ch.op.spec() == h.spec()))
      throw std::invalid_argument("evolve_lindblad: channel dimension mismatch");
    const SparseMatrix l = ch.op.matrix();
    const SparseMatrix ldl = SparseMatrix(SparseMatrix(l.adjoint()) * l);
    liou += SparseMatrix(Complex(ch.rate, 0.0) *
                         (kron(SparseMatrix(l.conjugate()), l) -
                          Complex(0.5, 0.0) * kron(id, ldl) -
                          Complex(0.5, 0.0) * kron(SparseMatrix(ldl.transpose()), id)));
  }
  return liou;
}

}  // namespace

EvolutionResult evolve_lindblad(const FockOperator& h, const std::vector<LindbladChannel>& channels,
                                const QuantumState& rho0, const std::vector<double>& t_grid,
                                const std::vector<Observable>& observables,
                                const EvolveOptions& opts) {
  check_grid(t_grid);
  validate_observables(observables, h.spec());
  if (h.hermiticity_defect() > 1e-12)
    throw std::invalid_argument("evolve_lindblad: Hamiltonian is not Hermitian");

  const Index d = h.spec().dim();
  const SparseMatrix liou = vectorized_liouvillian(h, channels);

  EvolutionResult res;
  init_result(res, observables);
  res.times = t_grid;
  const double state_tol = std::max(1e-8, 100.0 * opts.tol);

  const double total_span = t_grid.back() - t_grid.front();
  DenseMatrix rho = rho0.to_density().matrix();
  Vector v = Eigen::Map<const Vector>(rho.data(), d * d);
  auto rhs = [&liou](double, const Vector& y, Vector& dydt) { dydt = liou * y; };

  for (size_t i = 0; i < t_grid.size(); ++i) {
    if (i > 0)
      rk45_advance(rhs, v, t_grid[i - 1], t_grid[i], opts.tol, total_span,
                   std::numeric_limits<double>::infinity(), res.stats);
    DenseMatrix rho_t = Eigen::Map<const DenseMatrix>(v.data(), d, d);
    const double drift = std::abs(rho_t.trace().real() - 1.0) + std::abs(rho_t.trace().imag());
    res.stats.norm_drift = std::max(res.stats.norm_drift, drift);
    if (drift > 10.0 * opts.tol) {
      std::ostringstream os;
      os << "evolve_lindblad: trace drift " << drift << " exceeds 10*tol at t = " << t_grid[i]
         << " after " << res.stats.steps_accepted << " steps";
      throw ConvergenceError(os.str());
    }
    record_density(res, observables, h.spec(), rho_t, opts.keep_states, state_tol, res.stats);
  }
  return res;
}

EvolutionResult evolve_lindblad(const TimeDependentHamiltonian& h,
                                const std::vector<LindbladChannel>& channels,
                                const QuantumState& rho0, const std::vector<double>& t_grid,
                                const std::vector<Observable>& observables,
                                const EvolveOptions& opts) {
  check_grid(t_grid);
  validate_observables(observables, h.spec());

  // Dense term cache; density-matrix runs live at small dimension anyway.
  struct DenseTerm {
    Complex coeff;
    double freq;
    DenseMatrix op;
  };
  std::vector<DenseTerm> terms;
  for (const auto& t : h.harmonic_terms()) terms.push_back({t.coeff, t.freq, DenseMatrix(t.op)});

  struct DenseChannel {
    DenseMatrix l, ldl;
    double rate;
  };
  std::vector<DenseChannel> chans;
  for (const auto& ch : channels) {
    if (ch.rate < 0.0) throw std::invalid_argument("evolve_lindblad: negative rate");
    DenseMatrix l = ch.op.dense();
    chans.push_back({l, DenseMatrix(l.adjoint() * l), ch.rate});
  }

  double max_h = std::numeric_limits<double>::infinity();
  if (auto period = h.period_hint()) max_h = *period / 30.0;

  EvolutionResult res;
  init_result(res, observables);
  res.times = t_grid;
  const double state_tol = std::max(1e-8, 100.0 * opts.tol);

  const Index d = h.spec().dim();
  const double total_span = t_grid.back() - t_grid.front();
  DenseMatrix rho = rho0.to_density().matrix();
  DenseMatrix ht(d, d);
  auto rhs = [&](double t, const DenseMatrix& y, DenseMatrix& dydt) {
    ht.setZero();
    for (const auto& term : terms) ht += (term.coeff * std::polar(1.0, term.freq * t)) * term.op;
    dydt = Complex(0.0, -1.0) * (ht * y - y * ht);
    for (const auto& ch : chans)
      dydt += ch.rate * (ch.l * y * ch.l.adjoint() - 0.5 * (ch.ldl * y + y * ch.ldl));
  };

  for (size_t i = 0; i < t_grid.size(); ++i) {
    if (i > 0)
      rk45_advance(rhs, rho, t_grid[i - 1], t_grid[i], opts.tol, total_span, max_h,
                   res.stats);
    const double drift = std::abs(rho.trace().real() - 1.0) + std::abs(rho.trace().imag());
    res.stats.norm_drift = std::max(res.stats.norm_drift, drift);
    if (drift > 10.0 * opts.tol) {
      std::ostringstream os;
      os << "evolve_lindblad(td): trace drift " << drift << " exceeds 10*tol at t = " << t_grid[i];
      throw ConvergenceError(os.str());
    }
    record_density(res, observables, h.spec(), rho, opts.keep_states, state_tol, res.stats);
  }
  return res;
}

double max_trace_deviation(const EvolutionResult& a, const EvolutionResult& b) {
  double dev = 0.0;
  for (size_t i = 0; i < a.observable_names.size(); ++i)
    for (size_t j = 0; j < b.observable_names.size(); ++j)
      if (a.observable_names[i] == b.observable_names[j]) {
        const size_t n = std::min(a.observables[i].size(), b.observables[j].size());
        for (size_t k = 0; k < n; ++k)
          dev = std::max(dev, std::abs(a.observables[i][k] - b.observables[j][k]));
      }
  return dev;
}

}  // namespace tpr
