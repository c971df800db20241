#include "tpr/params.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace tpr {

namespace {

void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw std::invalid_argument(where + ": unknown key '" + it.key() + "'");
}

}  // namespace

void EffectiveParams::validate() const {
  if (omega <= 0.0) throw std::invalid_argument("EffectiveParams: omega must be positive");
  if (omega_q.empty() || g.size() != omega_q.size())
    throw std::invalid_argument("EffectiveParams: omega_q and g must be nonempty lists of equal length");
}

EffectiveParams EffectiveParams::single(double omega, double omega_q, double g, SignConvention sc) {
  EffectiveParams p;
  p.omega = omega;
  p.omega_q = {omega_q};
  p.g = {g};
  p.sign_convention = sc;
  p.validate();
  return p;
}

EffectiveParams EffectiveParams::homogeneous(int n_qubits, double omega, double omega_q, double g,
                                             SignConvention sc) {
  EffectiveParams p;
  p.omega = omega;
  p.omega_q.assign(n_qubits, omega_q);
  p.g.assign(n_qubits, g);
  p.sign_convention = sc;
  p.validate();
  return p;
}

std::vector<std::string> PhysicalParams::regime_violations(double ratio_max) const {
  std::vector<std::string> out;
  if (nu <= 0.0) {
    out.push_back("trap frequency nu must be positive");
    return out;
  }
  auto check = [&](double value, const char* name) {
    const double r = std::abs(value) / nu;
    if (r > ratio_max) {
      std::ostringstream os;
      os << name << "/nu = " << r << " exceeds " << ratio_max;
      out.push_back(os.str());
    }
  };
  check(delta_r, "|delta_r|");
  check(delta_b, "|delta_b|");
  check(Omega, "Omega");
  return out;
}

double PhysicalParams::lamb_dicke_figure(double mean_phonon) const {
  return eta * eta * (2.0 * mean_phonon + 1.0);
}

EffectiveParams params_to_effective(const PhysicalParams& p) {
  EffectiveParams e;
  e.omega = 0.25 * (p.delta_r - p.delta_b);
  e.omega_q = {-0.5 * (p.delta_r + p.delta_b)};
  e.g = {0.25 * p.eta * p.eta * p.Omega};
  e.sign_convention = SignConvention::minus;
  return e;
}

PhysicalParams effective_to_params(const EffectiveParams& e, double nu,
                                   std::optional<double> eta, std::optional<double> Omega) {
  if (e.n_qubits() != 1)
    throw std::invalid_argument("effective_to_params: only the single-qubit map is defined");
  if (eta.has_value() == Omega.has_value())
    throw std::invalid_argument("effective_to_params: pin exactly one of eta or Omega");
  PhysicalParams p;
  p.nu = nu;
  // Invert omega = (delta_r - delta_b)/4 and omega_q = -(delta_r + delta_b)/2.
  p.delta_r = 2.0 * e.omega - e.omega_q[0];
  p.delta_b = -2.0 * e.omega - e.omega_q[0];
  const double g = e.g[0];
  if (eta) {
    p.eta = *eta;
    p.Omega = 4.0 * g / (p.eta * p.eta);
  } else {
    p.Omega = *Omega;
    if (p.Omega <= 0.0) throw std::invalid_argument("effective_to_params: Omega must be positive");
    p.eta = std::sqrt(4.0 * g / p.Omega);
  }
  return p;
}

nlohmann::json effective_to_json(const EffectiveParams& e) {
  return nlohmann::json{
      {"type", "effective"},
      {"units", "omega"},
      {"omega", e.omega},
      {"omega_q", e.omega_q},
      {"g", e.g},
      {"sign_convention", e.sign_convention == SignConvention::minus ? "minus" : "plus"},
  };
}

EffectiveParams effective_from_json(const nlohmann::json& j) {
  reject_unknown_keys(j, {"type", "units", "omega", "omega_q", "g", "sign_convention"},
                      "effective params");
  if (j.value("type", "effective") != std::string("effective"))
    throw std::invalid_argument("effective params: type must be 'effective'");
  EffectiveParams e;
  e.omega = j.at("omega").get<double>();
  e.omega_q = j.at("omega_q").get<std::vector<double>>();
  e.g = j.at("g").get<std::vector<double>>();
  const std::string sc = j.value("sign_convention", "minus");
  if (sc == "minus")
    e.sign_convention = SignConvention::minus;
  else if (sc == "plus")
    e.sign_convention = SignConvention::plus;
  else
    throw std::invalid_argument("effective params: sign_convention must be 'plus' or 'minus'");
  e.validate();
  return e;
}

nlohmann::json physical_to_json(const PhysicalParams& p) {
  constexpr double two_pi = 6.283185307179586476925286766559;
  return nlohmann::json{
      {"type", "physical"},
      {"nu_over_2pi_hz", p.nu / two_pi},
      {"omega_int_over_2pi_hz", p.omega_int / two_pi},
      {"delta_r_over_2pi_hz", p.delta_r / two_pi},
      {"delta_b_over_2pi_hz", p.delta_b / two_pi},
      {"eta", p.eta},
      {"omega_drive_over_2pi_hz", p.Omega / two_pi},
      {"phi_r_rad", p.phi_r},
      {"phi_b_rad", p.phi_b},
  };
}

PhysicalParams physical_from_json(const nlohmann::json& j) {
  reject_unknown_keys(j,
                      {"type", "nu_over_2pi_hz", "omega_int_over_2pi_hz", "delta_r_over_2pi_hz",
                       "delta_b_over_2pi_hz", "eta", "omega_drive_over_2pi_hz", "phi_r_rad",
                       "phi_b_rad"},
                      "physical params");
  if (j.value("type", "physical") != std::string("physical"))
    throw std::invalid_argument("physical params: type must be 'physical'");
  PhysicalParams p;
  p.nu = two_pi_hz(j.at("nu_over_2pi_hz").get<double>());
  p.omega_int = two_pi_hz(j.value("omega_int_over_2pi_hz", 0.0));
  p.delta_r = two_pi_hz(j.at("delta_r_over_2pi_hz").get<double>());
  p.delta_b = two_pi_hz(j.at("delta_b_over_2pi_hz").get<double>());
  p.eta = j.at("eta").get<double>();
  p.Omega = two_pi_hz(j.at("omega_drive_over_2pi_hz").get<double>());
  p.phi_r = j.value("phi_r_rad", 0.0);
  p.phi_b = j.value("phi_b_rad", 0.0);
  return p;
}

}  // namespace tpr
