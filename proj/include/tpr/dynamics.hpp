#ifndef TPR_DYNAMICS_HPP
#define TPR_DYNAMICS_HPP

#include "tpr/fock.hpp"
#include "tpr/hamiltonians.hpp"

#include <string>
#include <vector>

namespace tpr {

/// Dissipation channel for the Lindblad equation, rate in the inverse time
/// unit of the Hamiltonian (1/s when H is in rad/s).
struct LindbladChannel {
  FockOperator op;
  double rate;
};

/// Named expectation value recorded along an evolution. Expectations of
/// Hermitian operators are real; set `imaginary_part` to record Im<O>
/// instead of Re<O> (used for the non-Hermitian generalized parity).
struct Observable {
  std::string name;
  FockOperator op;
  bool imaginary_part = false;
};

struct IntegratorStats {
  long steps_accepted = 0;
  long steps_rejected = 0;
  long rhs_evaluations = 0;
  double max_local_error = 0.0;
  double min_step = 0.0;
  double norm_drift = 0.0;   // max | ||psi|| - 1 | (or |tr rho - 1|) at outputs
  double min_density_eigenvalue = 0.0;
};

struct EvolutionResult {
  std::vector<double> times;
  std::vector<QuantumState> states;  // filled only when keep_states is set
  std::vector<std::string> observable_names;
  std::vector<std::vector<double>> observables;  // [observable][time]
  IntegratorStats stats;
};

struct EvolveOptions {
  double tol = 1e-9;
  bool keep_states = false;
  int krylov_dim = 30;
};

enum class ConstMethod { eig, krylov };

Complex expectation(const FockOperator& op, const QuantumState& state);

/// Exact propagator for a time-independent Hermitian operator, built once
/// and applied at many times.
class HermitianPropagator {
 public:
  explicit HermitianPropagator(const FockOperator& h, double herm_tol = 1e-12);
  Vector apply(double t, const Vector& v) const;  // e^{-i H t} v
  DenseMatrix unitary(double t) const;
  const Eigen::VectorXd& eigenvalues() const { return evals_; }

 private:
  Eigen::VectorXd evals_;
  DenseMatrix evecs_;
};

/// Lanczos propagation of e^{-i H t} v with adaptive substepping; the
/// accuracy target is an error budget for the whole interval.
Vector krylov_propagate(const SparseMatrix& h, const Vector& v, double t, double tol,
                        int m_max = 30, IntegratorStats* stats = nullptr);

EvolutionResult evolve_const(const FockOperator& h, const QuantumState& psi0,
                             const std::vector<double>& t_grid, ConstMethod method,
                             const std::vector<Observable>& observables,
                             const EvolveOptions& opts = {});

EvolutionResult evolve_td(const TimeDependentHamiltonian& h, const QuantumState& psi0,
                          const std::vector<double>& t_grid,
                          const std::vector<Observable>& observables,
                          const EvolveOptions& opts = {});

EvolutionResult evolve_lindblad(const FockOperator& h, const std::vector<LindbladChannel>& channels,
                                const QuantumState& rho0, const std::vector<double>& t_grid,
                                const std::vector<Observable>& observables,
                                const EvolveOptions& opts = {});

EvolutionResult evolve_lindblad(const TimeDependentHamiltonian& h,
                                const std::vector<LindbladChannel>& channels,
                                const QuantumState& rho0, const std::vector<double>& t_grid,
                                const std::vector<Observable>& observables,
                                const EvolveOptions& opts = {});

/// Largest pointwise deviation between matching observable traces of two
/// runs (used for truncation and tolerance self-consistency checks).
double max_trace_deviation(const EvolutionResult& a, const EvolutionResult& b);

std::vector<double> linspace(double t0, double t1, int n);

}  // namespace tpr

#endif
