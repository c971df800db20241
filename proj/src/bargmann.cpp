#include "tpr/bargmann.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tpr {

std::string to_string(SpectrumClass c) {
  switch (c) {
    case SpectrumClass::discrete: return "discrete";
    case SpectrumClass::collapse: return "collapse";
    default: return "continuous_unbounded";
  }
}

ExponentSet exponents(double omega_bar, double collapse_band) {
  if (omega_bar <= 0.0) throw std::invalid_argument("exponents: omega_bar must be positive");
  ExponentSet out;
  out.omega_bar = omega_bar;
  const double half = 0.5 * omega_bar;
  // s = sqrt(wbar^2/4 - 1), imaginary below the collapse point.
  const Complex s = std::sqrt(Complex(half * half - 1.0, 0.0));
  out.gammas = {half + s, half - s, -half + s, -half - s};

  if (std::abs(omega_bar - 2.0) < collapse_band) {
    out.classification = SpectrumClass::collapse;
    out.margin = 0.0;
  } else if (omega_bar > 2.0) {
    out.classification = SpectrumClass::discrete;
    // gamma_2 and gamma_3 = -gamma_2 sit inside the unit circle.
    out.margin = 1.0 - std::abs(out.gammas[1]);
  } else {
    out.classification = SpectrumClass::continuous_unbounded;
    out.margin = 0.0;  // every root has unit modulus
  }
  return out;
}

ModelClass classify_model(double g, double omega) {
  if (g < 0.0) throw std::invalid_argument("classify_model: g must be nonnegative");
  if (omega <= 0.0) throw std::invalid_argument("classify_model: omega must be positive");
  if (g == 0.0)
    return {SpectrumClass::discrete, 1.0, std::numeric_limits<double>::infinity()};
  const ExponentSet e = exponents(omega / g);
  return {e.classification, e.margin, e.omega_bar};
}

CrossValidation cross_validate(const SpectrumSweep& sweep, double g_lo, double g_hi) {
  CrossValidation out;
  for (size_t i = 0; i < sweep.g_grid.size(); ++i) {
    if (sweep.energies[i].size() < 2) continue;
    CrossValidation::Row row;
    row.g = sweep.g_grid[i];
    row.margin = classify_model(row.g, sweep.omega).margin;
    row.gap = sweep.energies[i][1] - sweep.energies[i][0];
    row.mean_photon_excited = sweep.mean_photon[i][1];
    row.converged = sweep.converged[i];
    out.rows.push_back(row);
  }
  bool margin_dec = true, gap_dec = true;
  const CrossValidation::Row* prev = nullptr;
  for (const auto& row : out.rows) {
    if (!row.converged || row.g < g_lo || row.g > g_hi) continue;
    if (prev) {
      margin_dec = margin_dec && row.margin < prev->margin;
      gap_dec = gap_dec && row.gap < prev->gap;
    }
    prev = &row;
  }
  out.margin_decreasing = margin_dec && prev != nullptr;
  out.gap_decreasing = gap_dec && prev != nullptr;
  return out;
}

}  // namespace tpr
