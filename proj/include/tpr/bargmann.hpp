#ifndef TPR_BARGMANN_HPP
#define TPR_BARGMANN_HPP

#include "tpr/fock.hpp"
#include "tpr/spectrum.hpp"

#include <array>
#include <string>
#include <vector>

namespace tpr {

enum class SpectrumClass { discrete, collapse, continuous_unbounded };

std::string to_string(SpectrumClass c);

/// Characteristic exponents of the asymptotic form e^{(gamma/2) z^2} of the
/// analytic-function-space solutions, the roots of
///   x^4 + (2 - wbar^2) x^2 + 1 = 0,   wbar = omega/g.
/// Normalizable solutions exist iff some root lies strictly inside the unit
/// circle, which happens exactly for wbar > 2 (g < omega/2).
struct ExponentSet {
  double omega_bar;
  std::array<Complex, 4> gammas;  // {wbar/2 + s, wbar/2 - s, -wbar/2 + s, -wbar/2 - s}
  SpectrumClass classification;
  double margin;  // min over inside roots of 1 - |gamma|; 0 at and past collapse
};

ExponentSet exponents(double omega_bar, double collapse_band = 1e-9);

struct ModelClass {
  SpectrumClass classification;
  double margin;
  double omega_bar;  // infinity at g = 0
};

/// Classification of the two-photon model at coupling g and mode frequency
/// omega; scale invariant by construction.
ModelClass classify_model(double g, double omega);

struct CrossValidation {
  struct Row {
    double g;
    double margin;
    double gap;                  // E1 - E0
    double mean_photon_excited;  // <n> of the first excited level
    bool converged;
  };
  std::vector<Row> rows;
  // Evaluated over converged rows with g inside the requested window:
  bool margin_decreasing = false;
  bool gap_decreasing = false;
};

/// Correlates the analytic distance-to-collapse margin with the numerically
/// observed gap shrinkage and photon-number growth of a spectrum sweep.
CrossValidation cross_validate(const SpectrumSweep& sweep, double g_lo = 0.3, double g_hi = 0.49);

}  // namespace tpr

#endif
