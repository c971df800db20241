#ifndef TPR_SPECTRUM_HPP
#define TPR_SPECTRUM_HPP

#include "tpr/fock.hpp"
#include "tpr/hamiltonians.hpp"

#include <array>
#include <string>
#include <vector>

namespace tpr {

enum class ParityLabel { plus_one, minus_one, plus_i, minus_i, mixed };

Complex parity_value(ParityLabel label);
std::string to_string(ParityLabel label);
ParityLabel nearest_parity_label(Complex value);

/// Z4 symmetry operator (-1)^N (x)_n sigma_z^n exp(i pi/2 a^dag a). It is
/// diagonal in the product basis, so sector membership is read off directly.
struct GeneralizedParity {
  HilbertSpec spec;
  FockOperator op;
  std::vector<ParityLabel> basis_labels;        // per basis index
  std::array<std::vector<Index>, 4> sectors;    // indices by label order (+1,-1,+i,-i)
};

GeneralizedParity build_parity(const HilbertSpec& spec);

struct ParityClassification {
  ParityLabel label;
  double purity;  // |<psi|Pi|psi>|, 1 for a pure sector state
  bool mixed;
};

ParityClassification classify(const Vector& eigenvector, const GeneralizedParity& parity);

struct EigenSystem {
  Eigen::VectorXd values;                 // ascending, k lowest
  DenseMatrix vectors;                    // dim x k
  std::vector<ParityLabel> labels;        // empty for the plain solver
  std::vector<int> sector_rank;           // rank within the parity sector
  double max_residual = 0.0;              // max ||Hv - Ev|| over returned pairs
};

/// k lowest eigenpairs by dense Hermitian diagonalization.
EigenSystem eigensystem(const FockOperator& h, int k);

/// k lowest eigenpairs obtained by diagonalizing each generalized-parity
/// block separately; degenerate cross-sector partners come out with clean
/// labels by construction.
EigenSystem eigensystem(const FockOperator& h, const GeneralizedParity& parity, int k);

struct SweepPolicy {
  std::vector<int> cutoff_schedule = {100, 200, 400, 800};
  double level_eps = 1e-8;        // energy change allowed under cutoff doubling
  double photon_rel_eps = 1e-6;   // relative <n> change allowed
};

struct SpectrumSweep {
  double omega = 1.0;
  std::vector<double> omega_q;
  SignConvention sign_convention = SignConvention::minus;
  std::vector<double> g_grid;
  // Per grid point, k entries each, ascending in energy.
  std::vector<std::vector<double>> energies;
  std::vector<std::vector<ParityLabel>> parities;
  std::vector<std::vector<int>> sector_rank;
  std::vector<std::vector<double>> mean_photon;
  std::vector<std::vector<char>> level_converged;
  std::vector<char> converged;          // per grid point: all levels converged
  std::vector<char> unbounded_regime;   // g > omega/2
  std::vector<int> cutoff_used;
};

/// Eigenvalue sweep over a coupling grid with adaptive cutoff escalation.
/// Points beyond the collapse coupling g = omega/2 are evaluated at the base
/// cutoff only and never marked converged. Set TPR_THREADS to fan the grid
/// out over worker threads.
SpectrumSweep sweep(const EffectiveParams& tmpl, const std::vector<double>& g_grid, int k,
                    const SweepPolicy& policy = {});

struct CrossingReport {
  double min_same_sector_gap;   // over all grid points and in-sector neighbors
  int cross_sector_swaps;       // energy-order exchanges between sectors
  int same_sector_swaps;        // must stay zero for a faithful sweep
};

CrossingReport analyze_crossings(const SpectrumSweep& sweep);

/// CSV with columns g,level_index,energy,parity,mean_photon,converged.
std::string sweep_csv(const SpectrumSweep& sweep);

}  // namespace tpr

#endif
