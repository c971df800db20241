#ifndef TPR_FOCK_HPP
#define TPR_FOCK_HPP

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <complex>
#include <string>
#include <vector>

namespace tpr {

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex>;
using DenseMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

constexpr Complex I_UNIT{0.0, 1.0};

/// Truncated Hilbert space of n_qubits two-level systems and one bosonic
/// mode with Fock states |0>..|fock_cutoff>. Basis ordering is
/// qubit_1 (x) ... (x) qubit_N (x) boson, qubit 1 slowest. Within each
/// qubit factor |e> comes before |g> (sigma_z |e> = +|e>).
struct HilbertSpec {
  int n_qubits;
  int fock_cutoff;

  HilbertSpec(int n_qubits_, int fock_cutoff_);

  int boson_dim() const { return fock_cutoff + 1; }
  int qubit_dim() const { return 1 << n_qubits; }
  Index dim() const { return Index(qubit_dim()) * boson_dim(); }

  /// Basis index of |qubit_bits, n>, where bit (n_qubits-1-site) of qubit_bits
  /// is 0 for |e> and 1 for |g> on that site.
  Index index_of(int qubit_bits, int n) const;

  /// Inverse of index_of.
  std::pair<int, int> labels_of(Index idx) const;

  bool operator==(const HilbertSpec& o) const {
    return n_qubits == o.n_qubits && fock_cutoff == o.fock_cutoff;
  }
};

/// Sparse operator on a truncated qubit (x) boson space.
class FockOperator {
 public:
  FockOperator(HilbertSpec spec, SparseMatrix matrix);

  const HilbertSpec& spec() const { return spec_; }
  const SparseMatrix& matrix() const { return matrix_; }

  FockOperator adjoint() const;
  DenseMatrix dense() const { return DenseMatrix(matrix_); }

  double max_abs_entry() const;
  double frobenius_norm() const;
  /// max |H - H^dag| entry relative to max |H| entry.
  double hermiticity_defect() const;
  bool is_hermitian(double tol = 1e-12) const { return hermiticity_defect() <= tol; }

  Vector apply(const Vector& v) const;

  FockOperator& operator+=(const FockOperator& o);
  FockOperator& operator-=(const FockOperator& o);
  FockOperator& operator*=(Complex c);

  friend FockOperator operator+(FockOperator a, const FockOperator& b) { return a += b; }
  friend FockOperator operator-(FockOperator a, const FockOperator& b) { return a -= b; }
  friend FockOperator operator*(Complex c, FockOperator a) { return a *= c; }
  friend FockOperator operator*(FockOperator a, Complex c) { return a *= c; }
  friend FockOperator operator*(const FockOperator& a, const FockOperator& b);

 private:
  HilbertSpec spec_;
  SparseMatrix matrix_;
};

FockOperator commutator(const FockOperator& a, const FockOperator& b);
FockOperator anticommutator(const FockOperator& a, const FockOperator& b);

enum class StateKind { pure, density };

/// Pure state vector or density matrix with basis bookkeeping.
/// Pure states are unit-norm, density matrices unit-trace Hermitian;
/// both validated on construction against `tol`.
class QuantumState {
 public:
  static QuantumState pure(HilbertSpec spec, Vector psi, double tol = 1e-10);
  static QuantumState density(HilbertSpec spec, DenseMatrix rho, double tol = 1e-10);

  /// Product basis state, e.g. basis(spec, "g", 2) or basis(spec, "ge", 0).
  /// `qubits` holds one 'g'/'e' character per qubit, qubit 1 first.
  static QuantumState basis(HilbertSpec spec, const std::string& qubits, int n);

  const HilbertSpec& spec() const { return spec_; }
  StateKind kind() const { return kind_; }
  const Vector& vector() const;
  const DenseMatrix& matrix() const;

  QuantumState to_density() const;

 private:
  QuantumState(HilbertSpec spec, StateKind kind) : spec_(spec), kind_(kind) {}
  HilbertSpec spec_;
  StateKind kind_;
  Vector vec_;
  DenseMatrix mat_;
};

enum class QubitAxis { x, y, z, plus, minus };

/// 2x2 qubit matrices in the (|e>, |g>) basis.
Eigen::Matrix2cd pauli(QubitAxis which);

/// (cutoff+1)-dimensional annihilation operator, a|n> = sqrt(n)|n-1>.
SparseMatrix boson_destroy(int cutoff);
SparseMatrix sparse_identity(Index dim);

/// Full-space operators (identity on all other tensor factors).
FockOperator identity_op(const HilbertSpec& spec);
FockOperator destroy(const HilbertSpec& spec);
FockOperator create(const HilbertSpec& spec);
FockOperator number_op(const HilbertSpec& spec);
FockOperator qubit_op(const HilbertSpec& spec, QubitAxis which, int site);

/// Kronecker product of the factors in the given order (qubits first,
/// boson last); the product of factor dimensions must equal spec.dim().
FockOperator tensor_assemble(const HilbertSpec& spec, const std::vector<SparseMatrix>& factors);

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b);

}  // namespace tpr

#endif
