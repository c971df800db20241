#include "tpr/fock.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <stdexcept>

namespace tpr {

HilbertSpec::HilbertSpec(int n_qubits_, int fock_cutoff_)
    : n_qubits(n_qubits_), fock_cutoff(fock_cutoff_) {
  if (n_qubits < 1) throw std::invalid_argument("HilbertSpec: n_qubits must be >= 1");
  if (fock_cutoff < 2)
    throw std::invalid_argument("HilbertSpec: fock_cutoff must be >= 2 (two-photon terms need n=2)");
}

Index HilbertSpec::index_of(int qubit_bits, int n) const {
  if (qubit_bits < 0 || qubit_bits >= qubit_dim())
    throw std::invalid_argument("HilbertSpec::index_of: qubit_bits out of range");
  if (n < 0 || n > fock_cutoff)
    throw std::invalid_argument("HilbertSpec::index_of: Fock index out of range");
  return Index(qubit_bits) * boson_dim() + n;
}

std::pair<int, int> HilbertSpec::labels_of(Index idx) const {
  if (idx < 0 || idx >= dim()) throw std::invalid_argument("HilbertSpec::labels_of: index out of range");
  return {int(idx / boson_dim()), int(idx % boson_dim())};
}

FockOperator::FockOperator(HilbertSpec spec, SparseMatrix matrix)
    : spec_(spec), matrix_(std::move(matrix)) {
  if (matrix_.rows() != spec_.dim() || matrix_.cols() != spec_.dim())
    throw std::invalid_argument("FockOperator: matrix dimension does not match HilbertSpec");
  matrix_.makeCompressed();
}

FockOperator FockOperator::adjoint() const {
  return FockOperator(spec_, SparseMatrix(matrix_.adjoint()));
}

double FockOperator::max_abs_entry() const {
  double m = 0.0;
  for (int k = 0; k < matrix_.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(matrix_, k); it; ++it)
      m = std::max(m, std::abs(it.value()));
  return m;
}

double FockOperator::frobenius_norm() const { return matrix_.norm(); }

double FockOperator::hermiticity_defect() const {
  const double scale = max_abs_entry();
  if (scale == 0.0) return 0.0;
  SparseMatrix d = matrix_ - SparseMatrix(matrix_.adjoint());
  double m = 0.0;
  for (int k = 0; k < d.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(d, k); it; ++it)
      m = std::max(m, std::abs(it.value()));
  return m / scale;
}

Vector FockOperator::apply(const Vector& v) const {
  if (v.size() != spec_.dim())
    throw std::invalid_argument("FockOperator::apply: vector dimension mismatch");
  return matrix_ * v;
}

FockOperator& FockOperator::operator+=(const FockOperator& o) {
  if (!(spec_ == o.spec_)) throw std::invalid_argument("FockOperator: spec mismatch in +");
  matrix_ += o.matrix_;
  return *this;
}

FockOperator& FockOperator::operator-=(const FockOperator& o) {
  if (!(spec_ == o.spec_)) throw std::invalid_argument("FockOperator: spec mismatch in -");
  matrix_ -= o.matrix_;
  return *this;
}

FockOperator& FockOperator::operator*=(Complex c) {
  matrix_ *= c;
  return *this;
}

FockOperator operator*(const FockOperator& a, const FockOperator& b) {
  if (!(a.spec_ == b.spec_)) throw std::invalid_argument("FockOperator: spec mismatch in *");
  return FockOperator(a.spec_, SparseMatrix(a.matrix_ * b.matrix_));
}

FockOperator commutator(const FockOperator& a, const FockOperator& b) { return a * b - b * a; }

FockOperator anticommutator(const FockOperator& a, const FockOperator& b) { return a * b + b * a; }

QuantumState QuantumState::pure(HilbertSpec spec, Vector psi, double tol) {
  if (psi.size() != spec.dim())
    throw std::invalid_argument("QuantumState::pure: vector dimension mismatch");
  if (std::abs(psi.norm() - 1.0) > tol)
    throw std::invalid_argument("QuantumState::pure: state not normalized");
  QuantumState s(spec, StateKind::pure);
  s.vec_ = std::move(psi);
  return s;
}

QuantumState QuantumState::density(HilbertSpec spec, DenseMatrix rho, double tol) {
  if (rho.rows() != spec.dim() || rho.cols() != spec.dim())
    throw std::invalid_argument("QuantumState::density: matrix dimension mismatch");
  if (std::abs(rho.trace() - Complex(1.0, 0.0)) > tol)
    throw std::invalid_argument("QuantumState::density: trace != 1");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument("QuantumState::density: not Hermitian");
  QuantumState s(spec, StateKind::density);
  s.mat_ = std::move(rho);
  return s;
}

QuantumState QuantumState::basis(HilbertSpec spec, const std::string& qubits, int n) {
  if (int(qubits.size()) != spec.n_qubits)
    throw std::invalid_argument("QuantumState::basis: need one g/e label per qubit");
  int bits = 0;
  for (char c : qubits) {
    bits <<= 1;
    if (c == 'g')
      bits |= 1;
    else if (c != 'e')
      throw std::invalid_argument("QuantumState::basis: qubit labels must be 'g' or 'e'");
  }
  Vector v = Vector::Zero(spec.dim());
  v[spec.index_of(bits, n)] = 1.0;
  return pure(spec, std::move(v));
}

const Vector& QuantumState::vector() const {
  if (kind_ != StateKind::pure) throw std::logic_error("QuantumState: not a pure state");
  return vec_;
}

const DenseMatrix& QuantumState::matrix() const {
  if (kind_ != StateKind::density) throw std::logic_error("QuantumState: not a density matrix");
  return mat_;
}

QuantumState QuantumState::to_density() const {
  if (kind_ == StateKind::density) return *this;
  return density(spec_, vec_ * vec_.adjoint());
}

Eigen::Matrix2cd pauli(QubitAxis which) {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  switch (which) {
    case QubitAxis::x: m(0, 1) = 1.0; m(1, 0) = 1.0; break;
    case QubitAxis::y: m(0, 1) = -I_UNIT; m(1, 0) = I_UNIT; break;
    case QubitAxis::z: m(0, 0) = 1.0; m(1, 1) = -1.0; break;
    case QubitAxis::plus: m(0, 1) = 1.0; break;   // |g> -> |e>
    case QubitAxis::minus: m(1, 0) = 1.0; break;  // |e> -> |g>
  }
  return m;
}

SparseMatrix boson_destroy(int cutoff) {
  SparseMatrix a(cutoff + 1, cutoff + 1);
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(cutoff);
  for (int n = 1; n <= cutoff; ++n) trips.emplace_back(n - 1, n, std::sqrt(double(n)));
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

SparseMatrix sparse_identity(Index dim) {
  SparseMatrix id(dim, dim);
  id.setIdentity();
  return id;
}

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
  SparseMatrix out = Eigen::kroneckerProduct(a, b).eval();
  out.makeCompressed();
  return out;
}

FockOperator tensor_assemble(const HilbertSpec& spec, const std::vector<SparseMatrix>& factors) {
  if (factors.empty()) throw std::invalid_argument("tensor_assemble: no factors");
  Index prod = 1;
  for (const auto& f : factors) {
    if (f.rows() != f.cols()) throw std::invalid_argument("tensor_assemble: factors must be square");
    prod *= f.rows();
  }
  if (prod != spec.dim())
    throw std::invalid_argument("tensor_assemble: factor dimensions do not multiply to spec dimension");
  SparseMatrix out = factors[0];
  for (size_t i = 1; i < factors.size(); ++i) out = kron(out, factors[i]);
  return FockOperator(spec, std::move(out));
}

FockOperator identity_op(const HilbertSpec& spec) {
  return FockOperator(spec, sparse_identity(spec.dim()));
}

FockOperator destroy(const HilbertSpec& spec) {
  return FockOperator(spec, kron(sparse_identity(spec.qubit_dim()), boson_destroy(spec.fock_cutoff)));
}

FockOperator create(const HilbertSpec& spec) { return destroy(spec).adjoint(); }

FockOperator number_op(const HilbertSpec& spec) {
  SparseMatrix n(spec.boson_dim(), spec.boson_dim());
  std::vector<Eigen::Triplet<Complex>> trips;
  for (int k = 1; k <= spec.fock_cutoff; ++k) trips.emplace_back(k, k, double(k));
  n.setFromTriplets(trips.begin(), trips.end());
  return FockOperator(spec, kron(sparse_identity(spec.qubit_dim()), n));
}

FockOperator qubit_op(const HilbertSpec& spec, QubitAxis which, int site) {
  if (site < 0 || site >= spec.n_qubits)
    throw std::invalid_argument("qubit_op: site out of range");
  SparseMatrix op = sparse_identity(1);
  const SparseMatrix sig = pauli(which).sparseView();
  const SparseMatrix id2 = sparse_identity(2);
  for (int q = 0; q < spec.n_qubits; ++q) op = kron(op, q == site ? sig : id2);
  return FockOperator(spec, kron(op, sparse_identity(spec.boson_dim())));
}

}  // namespace tpr
