#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tpr/fock.hpp"

#include <random>

using namespace tpr;

namespace {

// Brute-force Kronecker product, kept independent of the library path.
DenseMatrix kron_reference(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

SparseMatrix random_sparse(int dim, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DenseMatrix m = DenseMatrix::Zero(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j)
      if (u(rng) > 0.2) m(i, j) = Complex(u(rng), u(rng));
  return m.sparseView();
}

}  // namespace

TEST_CASE("HilbertSpec dimensions and validation") {
  HilbertSpec spec(2, 4);
  CHECK(spec.dim() == 4 * 5);
  CHECK(spec.boson_dim() == 5);
  CHECK(spec.index_of(0, 0) == 0);
  CHECK(spec.index_of(3, 4) == 19);
  auto [bits, n] = spec.labels_of(7);
  CHECK(bits == 1);
  CHECK(n == 2);
  CHECK_THROWS_AS(HilbertSpec(0, 4), std::invalid_argument);
  CHECK_THROWS_AS(HilbertSpec(1, 1), std::invalid_argument);
  CHECK_THROWS_AS(spec.index_of(4, 0), std::invalid_argument);
  CHECK_THROWS_AS(spec.index_of(0, 5), std::invalid_argument);
}

TEST_CASE("ladder operators on the truncated basis") {
  HilbertSpec spec(1, 3);
  const FockOperator a = destroy(spec);

  // a|2> = sqrt(2)|1>
  Vector v = Vector::Zero(spec.dim());
  v[spec.index_of(0, 2)] = 1.0;
  Vector av = a.apply(v);
  CHECK(std::abs(av[spec.index_of(0, 1)] - Complex(1.41421356237309515, 0)) < 1e-12);
  CHECK(av.norm() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  // vacuum annihilation
  Vector vac = Vector::Zero(spec.dim());
  vac[spec.index_of(0, 0)] = 1.0;
  CHECK(a.apply(vac).norm() == 0.0);

  // number operator eigenvalues
  const FockOperator n_op = create(spec) * a;
  for (int k = 0; k <= spec.fock_cutoff; ++k) {
    Vector e = Vector::Zero(spec.dim());
    e[spec.index_of(0, k)] = 1.0;
    CHECK((n_op.apply(e) - double(k) * e).norm() < 1e-12);
  }
  CHECK((n_op.matrix() - number_op(spec).matrix()).norm() < 1e-12);
}

TEST_CASE("a and a^dag are exact numerical adjoints") {
  HilbertSpec spec(1, 7);
  const SparseMatrix d = destroy(spec).matrix() - create(spec).adjoint().matrix();
  CHECK(d.norm() == 0.0);
}

TEST_CASE("truncated commutator [a, a^dag] deviates only at |cutoff><cutoff|") {
  HilbertSpec spec(1, 6);
  const FockOperator c = commutator(destroy(spec), create(spec)) - identity_op(spec);
  const DenseMatrix dev = c.dense();
  for (Index i = 0; i < spec.dim(); ++i)
    for (Index j = 0; j < spec.dim(); ++j) {
      const bool top_corner = i == j && spec.labels_of(i).second == spec.fock_cutoff;
      if (top_corner)
        CHECK(std::abs(dev(i, j) - Complex(-double(spec.fock_cutoff) - 1.0, 0.0)) < 1e-13);
      else
        CHECK(std::abs(dev(i, j)) < 1e-14);
    }
}

TEST_CASE("qubit operators: conventions and algebra") {
  HilbertSpec spec(1, 2);
  const FockOperator sz = qubit_op(spec, QubitAxis::z, 0);

  // sigma_z |g> = -|g> with |g> the lower-energy eigenstate
  const Vector g = QuantumState::basis(spec, "g", 0).vector();
  CHECK((sz.apply(g) + g).norm() < 1e-15);
  const Vector e = QuantumState::basis(spec, "e", 0).vector();
  CHECK((sz.apply(e) - e).norm() < 1e-15);

  // sigma_pm = (sigma_x +/- i sigma_y)/2 entrywise
  const Eigen::Matrix2cd sx = pauli(QubitAxis::x), sy = pauli(QubitAxis::y);
  CHECK((pauli(QubitAxis::plus) - 0.5 * (sx + I_UNIT * sy)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((pauli(QubitAxis::minus) - 0.5 * (sx - I_UNIT * sy)).cwiseAbs().maxCoeff() == 0.0);

  // [sigma_x, sigma_z] = -2i sigma_y
  const FockOperator comm = commutator(qubit_op(spec, QubitAxis::x, 0), sz);
  const FockOperator rhs = Complex(0.0, -2.0) * qubit_op(spec, QubitAxis::y, 0);
  CHECK((comm.matrix() - rhs.matrix()).norm() < 1e-15);

  CHECK_THROWS_AS(qubit_op(spec, QubitAxis::x, 1), std::invalid_argument);
}

TEST_CASE("Pauli set is Hermitian, involutory and anticommuting per site") {
  HilbertSpec spec(2, 3);
  for (int site = 0; site < 2; ++site) {
    const FockOperator x = qubit_op(spec, QubitAxis::x, site);
    const FockOperator y = qubit_op(spec, QubitAxis::y, site);
    const FockOperator z = qubit_op(spec, QubitAxis::z, site);
    for (const auto* op : {&x, &y, &z}) {
      CHECK(op->hermiticity_defect() == 0.0);
      CHECK(((*op) * (*op) - identity_op(spec)).frobenius_norm() < 1e-14);
    }
    CHECK(anticommutator(x, y).frobenius_norm() < 1e-14);
    CHECK(anticommutator(y, z).frobenius_norm() < 1e-14);
    CHECK(anticommutator(x, z).frobenius_norm() < 1e-14);
  }
  // Different sites commute.
  CHECK(commutator(qubit_op(spec, QubitAxis::x, 0), qubit_op(spec, QubitAxis::y, 1))
            .frobenius_norm() < 1e-14);
}

TEST_CASE("tensor_assemble fixed ordering and examples") {
  HilbertSpec spec(1, 2);
  // I2 (x) I2 = I4
  const SparseMatrix id2 = sparse_identity(2);
  const SparseMatrix i4 = kron(id2, id2);
  CHECK(DenseMatrix(i4).isIdentity(0.0));

  // sigma_z (x) a^dag a diagonal (0,1,2,0,-1,-2) in ordering |e,0..2>,|g,0..2>
  SparseMatrix n_boson(3, 3);
  n_boson.insert(1, 1) = 1.0;
  n_boson.insert(2, 2) = 2.0;
  const FockOperator op =
      tensor_assemble(spec, {pauli(QubitAxis::z).sparseView(), n_boson});
  const DenseMatrix d = op.dense();
  const double expected[6] = {0, 1, 2, 0, -1, -2};
  for (int i = 0; i < 6; ++i) CHECK(d(i, i) == Complex(expected[i], 0.0));

  // <e,0| (sigma_+ (x) a^2) |g,2> via brute-force product of factor entries
  const SparseMatrix a = boson_destroy(2);
  const SparseMatrix a2 = SparseMatrix(a * a);
  const FockOperator lifted = tensor_assemble(spec, {pauli(QubitAxis::plus).sparseView(), a2});
  const DenseMatrix ref = kron_reference(DenseMatrix(pauli(QubitAxis::plus)), DenseMatrix(a2));
  CHECK((lifted.dense() - ref).cwiseAbs().maxCoeff() == 0.0);
  const Index row = spec.index_of(0, 0);  // |e,0>
  const Index col = spec.index_of(1, 2);  // |g,2>
  CHECK(std::abs(lifted.dense()(row, col) - Complex(std::sqrt(2.0), 0.0)) < 1e-15);

  CHECK_THROWS_AS(tensor_assemble(spec, {id2}), std::invalid_argument);
}

TEST_CASE("tensor_assemble is associative") {
  std::mt19937 rng(7);
  const SparseMatrix a = random_sparse(2, rng);
  const SparseMatrix b = random_sparse(2, rng);
  const SparseMatrix c = random_sparse(3, rng);
  HilbertSpec spec(2, 2);
  const FockOperator left = tensor_assemble(spec, {SparseMatrix(kron(a, b)), c});
  const FockOperator right = tensor_assemble(spec, {a, SparseMatrix(kron(b, c))});
  const FockOperator flat = tensor_assemble(spec, {a, b, c});
  CHECK((left.matrix() - right.matrix()).norm() < 1e-14);
  CHECK((left.matrix() - flat.matrix()).norm() < 1e-14);
}

TEST_CASE("QuantumState validation and bookkeeping") {
  HilbertSpec spec(1, 3);
  Vector v = Vector::Zero(spec.dim());
  v[0] = 1.0;
  CHECK_NOTHROW(QuantumState::pure(spec, v));
  Vector bad = v * 1.001;
  CHECK_THROWS_AS(QuantumState::pure(spec, bad), std::invalid_argument);

  const QuantumState s = QuantumState::basis(spec, "g", 2);
  CHECK(s.vector()[spec.index_of(1, 2)] == Complex(1.0, 0.0));
  CHECK_THROWS_AS(QuantumState::basis(spec, "x", 0), std::invalid_argument);
  CHECK_THROWS_AS(QuantumState::basis(spec, "gg", 0), std::invalid_argument);

  const QuantumState rho = s.to_density();
  CHECK(rho.kind() == StateKind::density);
  CHECK(std::abs(rho.matrix().trace() - Complex(1.0, 0.0)) < 1e-14);

  DenseMatrix not_herm = rho.matrix();
  not_herm(0, 1) = Complex(0.5, 0.0);
  CHECK_THROWS_AS(QuantumState::density(spec, not_herm), std::invalid_argument);
}
