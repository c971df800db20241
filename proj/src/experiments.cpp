#include "tpr/experiments.hpp"

#include "tpr/adiabatic.hpp"
#include "tpr/bargmann.hpp"
#include "tpr/dynamics.hpp"
#include "tpr/errors.hpp"
#include "tpr/measurement.hpp"
#include "tpr/spectrum.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

namespace tpr {

namespace {

constexpr const char* kVersion = "0.1.0";

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

EffectiveParams effective_params_from_config(const nlohmann::json& config) {
  if (!config.contains("params")) throw ConfigError("config: missing 'params' block");
  try {
    return effective_from_json(config.at("params"));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config.params: ") + e.what());
  }
}

PhysicalParams physical_params_from_config(const nlohmann::json& config) {
  if (!config.contains("params")) throw ConfigError("config: missing 'params' block");
  try {
    return physical_from_json(config.at("params"));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config.params: ") + e.what());
  }
}

QuantumState initial_state_from_config(const nlohmann::json& config, const HilbertSpec& spec) {
  if (!config.contains("initial_state"))
    throw ConfigError("config: missing 'initial_state' block");
  const auto& j = config.at("initial_state");
  reject_unknown(j, {"qubits", "fock"}, "initial_state");
  try {
    return QuantumState::basis(spec, j.at("qubits").get<std::string>(), j.at("fock").get<int>());
  } catch (const std::exception& e) {
    throw ConfigError(std::string("initial_state: ") + e.what());
  }
}

// zeta = a^dag a + 2 sum_n sigma_+^n sigma_-^n, conserved in the RWA regime.
FockOperator excitation_number_op(const HilbertSpec& spec) {
  FockOperator zeta = number_op(spec);
  const FockOperator id = identity_op(spec);
  for (int q = 0; q < spec.n_qubits; ++q)
    zeta += id + qubit_op(spec, QubitAxis::z, q);  // 2 sigma_+ sigma_- = 1 + sigma_z
  return zeta;
}

// a^2 + a^dag^2 lifted to the full space.
FockOperator pair_coupling_op(const HilbertSpec& spec) {
  const SparseMatrix a = boson_destroy(spec.fock_cutoff);
  SparseMatrix a2 = SparseMatrix(a * a);
  return FockOperator(spec,
                      kron(sparse_identity(spec.qubit_dim()),
                           SparseMatrix(a2 + SparseMatrix(a2.adjoint()))));
}

std::vector<Observable> standard_observables(const HilbertSpec& spec, const QuantumState& psi0) {
  std::vector<Observable> obs;
  const Vector& v0 = psi0.vector();
  SparseMatrix proj = SparseMatrix((v0 * v0.adjoint()).sparseView());
  obs.push_back({"P_initial", FockOperator(spec, proj), false});
  obs.push_back({"mean_phonon", number_op(spec), false});
  obs.push_back({"sigma_z", qubit_op(spec, QubitAxis::z, 0), false});
  obs.push_back({"excitations", excitation_number_op(spec), false});
  const GeneralizedParity parity = build_parity(spec);
  obs.push_back({"parity_re", parity.op, false});
  obs.push_back({"parity_im", parity.op, true});
  return obs;
}

CsvTable trace_to_csv(const EvolutionResult& res, const std::map<std::string, std::string>& meta) {
  CsvTable t;
  t.meta = meta;
  t.columns.push_back("t");
  t.data.push_back(res.times);
  for (size_t i = 0; i < res.observable_names.size(); ++i) {
    t.columns.push_back(res.observable_names[i]);
    t.data.push_back(res.observables[i]);
  }
  return t;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file " + path);
  out << content;
}

std::string out_path(const nlohmann::json& config, const std::string& suffix) {
  std::string dir = ".";
  std::string base = "run";
  if (config.contains("output")) {
    const auto& o = config.at("output");
    reject_unknown(o, {"dir", "basename"}, "output");
    dir = o.value("dir", ".");
    base = o.value("basename", "run");
  }
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / (base + suffix)).string();
}

std::map<std::string, std::string> standard_meta(const nlohmann::json& config) {
  return {{"config_hash", json_hash(config)},
          {"params_hash", json_hash(config.value("params", nlohmann::json::object()))},
          {"version", kVersion}};
}

nlohmann::json stats_to_json(const IntegratorStats& s) {
  return {{"steps_accepted", s.steps_accepted},
          {"steps_rejected", s.steps_rejected},
          {"rhs_evaluations", s.rhs_evaluations},
          {"max_local_error", s.max_local_error},
          {"min_step", s.min_step},
          {"norm_drift", s.norm_drift},
          {"min_density_eigenvalue", s.min_density_eigenvalue}};
}

std::vector<LindbladChannel> channels_from_config(const nlohmann::json& noise,
                                                  const HilbertSpec& spec) {
  reject_unknown(noise, {"t1_s", "t2_s", "heating_per_s"}, "noise");
  std::vector<LindbladChannel> channels;
  if (noise.contains("t1_s")) {
    const double t1 = noise.at("t1_s").get<double>();
    if (t1 <= 0.0) throw ConfigError("noise.t1_s must be positive");
    for (int q = 0; q < spec.n_qubits; ++q)
      channels.push_back({qubit_op(spec, QubitAxis::minus, q), 1.0 / t1});
  }
  if (noise.contains("t2_s")) {
    const double t2 = noise.at("t2_s").get<double>();
    if (t2 <= 0.0) throw ConfigError("noise.t2_s must be positive");
    // L = sigma_z at rate 1/(2 t2) makes qubit coherences decay as e^{-t/t2}.
    for (int q = 0; q < spec.n_qubits; ++q)
      channels.push_back({qubit_op(spec, QubitAxis::z, q), 0.5 / t2});
  }
  if (noise.contains("heating_per_s")) {
    const double rate = noise.at("heating_per_s").get<double>();
    if (rate < 0.0) throw ConfigError("noise.heating_per_s must be nonnegative");
    channels.push_back({create(spec), rate});
  }
  return channels;
}

// ---------------------------------------------------------------- dynamics

RunOutcome run_dynamics(const nlohmann::json& config) {
  reject_unknown(config, {"experiment", "params", "numerics", "initial_state", "noise", "output"},
                 "config");
  const EffectiveParams params = effective_params_from_config(config);
  const auto& num = config.value("numerics", nlohmann::json::object());
  reject_unknown(num,
                 {"fock_cutoff", "tol", "t_max", "n_times", "method", "truncation_check",
                  "max_density_dim"},
                 "numerics");
  const int cutoff = num.value("fock_cutoff", 20);
  const double tol = num.value("tol", 1e-9);
  const double t_max = num.at("t_max").get<double>();
  const int n_times = num.value("n_times", 200);
  const std::string method_name = num.value("method", "eig");
  if (method_name != "eig" && method_name != "krylov")
    throw ConfigError("numerics.method must be 'eig' or 'krylov'");
  const ConstMethod method = method_name == "eig" ? ConstMethod::eig : ConstMethod::krylov;

  const HilbertSpec spec(params.n_qubits(), cutoff);
  const QuantumState psi0 = initial_state_from_config(config, spec);
  const std::vector<Observable> obs = standard_observables(spec, psi0);
  const std::vector<double> grid = linspace(0.0, t_max, n_times);
  const FockOperator h = build_dicke(params, spec);

  EvolveOptions opts;
  opts.tol = tol;

  const bool with_noise = config.contains("noise");
  EvolutionResult res = [&] {
    if (!with_noise) return evolve_const(h, psi0, grid, method, obs, opts);
    if (config.at("params").value("units", "omega") != "rad_per_s")
      throw ConfigError(
          "noise rates are in 1/s; dissipative runs need params with units 'rad_per_s'");
    const int max_density_dim = num.value("max_density_dim", 128);
    if (spec.dim() > max_density_dim)
      throw BudgetError("density-matrix evolution at dim " + std::to_string(spec.dim()) +
                        " exceeds numerics.max_density_dim = " + std::to_string(max_density_dim));
    return evolve_lindblad(h, channels_from_config(config.at("noise"), spec), psi0, grid, obs,
                           opts);
  }();

  RunOutcome outcome;
  nlohmann::json flags;
  if (num.value("truncation_check", false)) {
    const HilbertSpec spec2(params.n_qubits(), 2 * cutoff);
    const QuantumState psi0_2 = initial_state_from_config(config, spec2);
    const FockOperator h2 = build_dicke(params, spec2);
    const auto obs2 = standard_observables(spec2, psi0_2);
    const EvolutionResult res2 =
        with_noise ? evolve_lindblad(h2, channels_from_config(config.at("noise"), spec2), psi0_2,
                                     grid, obs2, opts)
                   : evolve_const(h2, psi0_2, grid, method, obs2, opts);
    const double dev = max_trace_deviation(res, res2);
    flags["truncation_deviation"] = dev;
    flags["truncation_converged"] = dev < 1e-6;
  }

  const std::string csv_path = out_path(config, ".csv");
  write_file(csv_path, format_csv(trace_to_csv(res, standard_meta(config))));
  outcome.files.push_back(csv_path);

  outcome.manifest = {{"experiment", "dynamics"},
                      {"config", config},
                      {"config_hash", json_hash(config)},
                      {"params_hash", json_hash(config.at("params"))},
                      {"version", kVersion},
                      {"integrator", stats_to_json(res.stats)},
                      {"flags", flags}};
  return outcome;
}

// --------------------------------------------------------------- full model

RunOutcome run_full_model(const nlohmann::json& config) {
  reject_unknown(config, {"experiment", "params", "numerics", "initial_state", "noise", "output"},
                 "config");
  const PhysicalParams phys = physical_params_from_config(config);
  const auto& num = config.value("numerics", nlohmann::json::object());
  reject_unknown(num,
                 {"fock_cutoff", "tol", "t_max_s", "n_times", "lamb_dicke_order",
                  "max_density_dim", "noise_on"},
                 "numerics");
  const int cutoff = num.value("fock_cutoff", 20);
  const double tol = num.value("tol", 1e-7);
  const double t_max = num.at("t_max_s").get<double>();
  const int n_times = num.value("n_times", 200);
  const int order = num.value("lamb_dicke_order", 4);

  const HilbertSpec spec(1, cutoff);
  const QuantumState psi0 = initial_state_from_config(config, spec);
  const std::vector<Observable> obs = standard_observables(spec, psi0);
  const std::vector<double> grid = linspace(0.0, t_max, n_times);

  const TimeDependentHamiltonian h_full = build_ion_full(phys, spec, order);
  const FockOperator h_eff = simulation_picture(phys, spec);

  EvolveOptions opts;
  opts.tol = tol;

  const bool with_noise = config.contains("noise");
  const std::string noise_on = num.value("noise_on", "full");
  std::vector<LindbladChannel> channels;
  if (with_noise) channels = channels_from_config(config.at("noise"), spec);

  EvolutionResult res_full =
      (with_noise && (noise_on == "full" || noise_on == "both"))
          ? evolve_lindblad(h_full, channels, psi0, grid, obs, opts)
          : evolve_td(h_full, psi0, grid, obs, opts);
  EvolutionResult res_exact =
      (with_noise && (noise_on == "exact" || noise_on == "both"))
          ? evolve_lindblad(h_eff, channels, psi0, grid, obs, opts)
          : evolve_const(h_eff, psi0, grid, ConstMethod::eig, obs, opts);

  double max_phonon = 0.0;
  for (size_t i = 0; i < res_full.observable_names.size(); ++i)
    if (res_full.observable_names[i] == "mean_phonon")
      for (double v : res_full.observables[i]) max_phonon = std::max(max_phonon, v);

  RunOutcome outcome;
  const std::string full_path = out_path(config, "_full.csv");
  const std::string exact_path = out_path(config, "_exact.csv");
  write_file(full_path, format_csv(trace_to_csv(res_full, standard_meta(config))));
  write_file(exact_path, format_csv(trace_to_csv(res_exact, standard_meta(config))));
  outcome.files = {full_path, exact_path};

  const ErrorBudget budget = error_budget(phys);
  outcome.manifest = {
      {"experiment", "full_model"},
      {"config", config},
      {"config_hash", json_hash(config)},
      {"params_hash", json_hash(config.at("params"))},
      {"version", kVersion},
      {"integrator_full", stats_to_json(res_full.stats)},
      {"integrator_exact", stats_to_json(res_exact.stats)},
      {"effective_params",
       {{"omega", params_to_effective(phys).omega},
        {"omega_q", params_to_effective(phys).omega_q[0]},
        {"g", params_to_effective(phys).g[0]}}},
      {"error_budget",
       {{"p_carrier", budget.p_carrier},
        {"p_lamb_dicke", budget.p_lamb_dicke},
        {"delta1_r_over_nu", budget.delta1_r},
        {"delta1_b_over_nu", budget.delta1_b},
        {"delta2_r_over_nu", budget.delta2_r},
        {"delta2_b_over_nu", budget.delta2_b}}},
      {"flags",
       {{"regime_violations", phys.regime_violations()},
        {"lamb_dicke_figure", phys.lamb_dicke_figure(max_phonon)},
        {"lamb_dicke_ok", phys.lamb_dicke_figure(max_phonon) < 0.1}}}};
  return outcome;
}

// ----------------------------------------------------------------- spectrum

RunOutcome run_spectrum(const nlohmann::json& config) {
  reject_unknown(config, {"experiment", "params", "numerics", "output"}, "config");
  const EffectiveParams params = effective_params_from_config(config);
  const auto& num = config.value("numerics", nlohmann::json::object());
  reject_unknown(num,
                 {"k_levels", "g_grid", "g_min", "g_max", "g_count", "cutoff_schedule",
                  "level_eps", "photon_rel_eps", "require_converged"},
                 "numerics");
  const int k = num.value("k_levels", 10);

  std::vector<double> g_grid;
  if (num.contains("g_grid")) {
    g_grid = num.at("g_grid").get<std::vector<double>>();
  } else {
    const double g0 = num.value("g_min", 0.0);
    const double g1 = num.at("g_max").get<double>();
    const int n = num.value("g_count", 11);
    g_grid = linspace(g0, g1, n);
  }

  SweepPolicy policy;
  if (num.contains("cutoff_schedule"))
    policy.cutoff_schedule = num.at("cutoff_schedule").get<std::vector<int>>();
  policy.level_eps = num.value("level_eps", policy.level_eps);
  policy.photon_rel_eps = num.value("photon_rel_eps", policy.photon_rel_eps);

  const SpectrumSweep result = sweep(params, g_grid, k, policy);
  const CrossingReport crossings = analyze_crossings(result);
  const CrossValidation xval = cross_validate(result);

  CsvTable csv = parse_csv(sweep_csv(result));
  csv.meta = standard_meta(config);
  const std::string csv_path = out_path(config, ".csv");
  write_file(csv_path, format_csv(csv));

  bool all_converged = true;
  for (size_t i = 0; i < result.g_grid.size(); ++i)
    if (!result.unbounded_regime[i] && !result.converged[i]) all_converged = false;

  RunOutcome outcome;
  outcome.files = {csv_path};
  outcome.manifest = {
      {"experiment", "spectrum"},
      {"config", config},
      {"config_hash", json_hash(config)},
      {"params_hash", json_hash(config.at("params"))},
      {"version", kVersion},
      {"cutoff_used", result.cutoff_used},
      {"converged", all_converged},
      {"crossings",
       {{"min_same_sector_gap", crossings.min_same_sector_gap},
        {"cross_sector_swaps", crossings.cross_sector_swaps},
        {"same_sector_swaps", crossings.same_sector_swaps}}},
      {"collapse_margin",
       {{"margin_decreasing", xval.margin_decreasing}, {"gap_decreasing", xval.gap_decreasing}}}};
  if (num.value("require_converged", true) && !all_converged)
    throw ConvergenceError("spectrum sweep: unconverged levels at max cutoff (see " + csv_path +
                           ")");
  return outcome;
}

// ---------------------------------------------------------------- adiabatic

RunOutcome run_adiabatic(const nlohmann::json& config) {
  reject_unknown(config, {"experiment", "params", "numerics", "output"}, "config");
  const EffectiveParams params = effective_params_from_config(config);
  const auto& num = config.value("numerics", nlohmann::json::object());
  reject_unknown(num,
                 {"fock_cutoff", "tol", "g_start", "g_end", "duration", "initial_state_index",
                  "n_checkpoints", "ladder"},
                 "numerics");
  RampSchedule schedule;
  schedule.g_start = num.value("g_start", 0.0);
  schedule.g_end = num.at("g_end").get<double>();
  schedule.duration = num.at("duration").get<double>();
  schedule.initial_state_index = num.value("initial_state_index", 0);
  const HilbertSpec spec(params.n_qubits(), num.value("fock_cutoff", 120));
  const double tol = num.value("tol", 1e-8);
  const int n_checkpoints = num.value("n_checkpoints", 200);

  const RampResult res = run_ramp(schedule, params, spec, tol, n_checkpoints);

  CsvTable csv;
  csv.meta = standard_meta(config);
  csv.columns = {"t", "g", "fidelity", "energy", "parity_re", "parity_im"};
  csv.data = {res.times, res.coupling, res.fidelity, res.energy, res.parity_re, res.parity_im};
  const std::string csv_path = out_path(config, ".csv");
  write_file(csv_path, format_csv(csv));

  nlohmann::json ladder = nlohmann::json::array();
  if (num.value("ladder", 0) > 1) {
    for (const auto& [dur, fid] :
         duration_ladder(schedule, params, spec, tol, num.at("ladder").get<int>()))
      ladder.push_back({{"duration", dur}, {"final_fidelity", fid}});
  }

  RunOutcome outcome;
  outcome.files = {csv_path};
  outcome.manifest = {{"experiment", "adiabatic"},
                      {"config", config},
                      {"config_hash", json_hash(config)},
                      {"params_hash", json_hash(config.at("params"))},
                      {"version", kVersion},
                      {"final_fidelity", res.final_fidelity},
                      {"initial_index", res.initial_index},
                      {"final_index", res.final_index},
                      {"sector", to_string(res.sector)},
                      {"parity_drift", res.parity_drift},
                      {"duration", res.duration},
                      {"ladder", ladder},
                      {"integrator", stats_to_json(res.stats)}};
  return outcome;
}

// ------------------------------------------------------------------ measure

RunOutcome run_measure(const nlohmann::json& config) {
  reject_unknown(config, {"experiment", "params", "numerics", "initial_state", "output"},
                 "config");
  const EffectiveParams params = effective_params_from_config(config);
  const auto& num = config.value("numerics", nlohmann::json::object());
  reject_unknown(num, {"fock_cutoff", "protocol", "site", "fd_step", "dispersive"}, "numerics");
  const HilbertSpec spec(params.n_qubits(), num.value("fock_cutoff", 16));
  const std::string protocol = num.value("protocol", "derivative");

  nlohmann::json report;
  if (protocol == "derivative") {
    const QuantumState state = initial_state_from_config(config, spec);
    const int site = num.value("site", 0);
    const DerivativeEstimate est =
        interaction_via_derivative(state, params, site, num.value("fd_step", 0.0));
    // Direct expectation of the coupling term as the oracle. The derivative
    // measures -(sign) (g_site/N) <sigma_x (a^2+a^dag^2)>, which is positive
    // g <sigma_x (a^2+a^dag^2)> in the minus convention.
    const double s = params.sign_convention == SignConvention::minus ? -1.0 : 1.0;
    const double oracle =
        (-s * params.g[site] / params.n_qubits()) *
        expectation(qubit_op(spec, QubitAxis::x, site) * pair_coupling_op(spec), state).real();
    report = {{"protocol", "derivative"},
              {"estimate", est.value},
              {"oracle", oracle},
              {"abs_error", std::abs(est.value - oracle)},
              {"fd_step", est.fd_step},
              {"richardson_error", est.richardson_error},
              {"step_ok", est.step_ok}};
  } else if (protocol == "parity") {
    const QuantumState state = initial_state_from_config(config, spec);
    const Complex est = parity_via_protocol(state, ParityDecomposition::standard());
    const Complex direct = expectation(build_parity(spec).op, state);
    report = {{"protocol", "parity"},
              {"estimate_re", est.real()},
              {"estimate_im", est.imag()},
              {"oracle_re", direct.real()},
              {"oracle_im", direct.imag()},
              {"abs_error", std::abs(est - direct)}};
  } else if (protocol == "dispersive") {
    const auto& d = num.value("dispersive", nlohmann::json::object());
    reject_unknown(d, {"delta", "Omega0", "eta", "phase", "window"}, "numerics.dispersive");
    const QuantumState state = initial_state_from_config(config, spec);
    const DispersiveModel model =
        dispersive_effective(d.value("delta", 20.0), d.value("Omega0", 2.0),
                             d.value("eta", 1.0), d.value("phase", 0.0), spec);
    const DispersiveValidation val = validate_dispersive(model, state, d.value("window", 0.0));
    report = {{"protocol", "dispersive"},
              {"window", val.window},
              {"fidelity_h_eff", val.fidelity_h_eff},
              {"fidelity_number_shift", val.fidelity_number_shift},
              {"regime_ok", model.regime_ok},
              {"predicted_error", model.predicted_error},
              {"rate", model.rate}};
  } else {
    throw ConfigError("numerics.protocol must be derivative, parity or dispersive");
  }

  RunOutcome outcome;
  outcome.manifest = {{"experiment", "measure"},
                      {"config", config},
                      {"config_hash", json_hash(config)},
                      {"params_hash", json_hash(config.at("params"))},
                      {"version", kVersion},
                      {"report", report}};
  const std::string path = out_path(config, ".report.json");
  write_file(path, outcome.manifest.dump(2) + "\n");
  outcome.files = {path};
  return outcome;
}

// ----------------------------------------------------------------- classify

RunOutcome run_classify(const nlohmann::json& config) {
  reject_unknown(config, {"experiment", "numerics", "output"}, "config");
  const auto& num = config.value("numerics", nlohmann::json::object());
  reject_unknown(num, {"g", "omega", "g_grid"}, "numerics");
  const double omega = num.value("omega", 1.0);
  std::vector<double> gs;
  if (num.contains("g_grid"))
    gs = num.at("g_grid").get<std::vector<double>>();
  else
    gs = {num.at("g").get<double>()};

  CsvTable csv;
  csv.meta = standard_meta(config);
  csv.columns = {"g",        "omega",    "omega_bar", "gamma1_re", "gamma1_im", "gamma2_re",
                 "gamma2_im", "gamma3_re", "gamma3_im", "gamma4_re", "gamma4_im", "margin",
                 "class_discrete", "class_collapse", "class_continuous"};
  csv.data.assign(csv.columns.size(), {});
  nlohmann::json rows = nlohmann::json::array();
  for (double g : gs) {
    const ModelClass mc = classify_model(g, omega);
    nlohmann::json row = {{"g", g},
                          {"omega", omega},
                          {"omega_bar", mc.omega_bar},
                          {"classification", to_string(mc.classification)},
                          {"margin", mc.margin}};
    std::array<Complex, 4> gammas{Complex(0, 0), Complex(0, 0), Complex(0, 0), Complex(0, 0)};
    if (g > 0.0) gammas = exponents(omega / g).gammas;
    size_t c = 0;
    csv.data[c++].push_back(g);
    csv.data[c++].push_back(omega);
    csv.data[c++].push_back(mc.omega_bar);
    for (int i = 0; i < 4; ++i) {
      csv.data[c++].push_back(gammas[i].real());
      csv.data[c++].push_back(gammas[i].imag());
    }
    csv.data[c++].push_back(mc.margin);
    csv.data[c++].push_back(mc.classification == SpectrumClass::discrete);
    csv.data[c++].push_back(mc.classification == SpectrumClass::collapse);
    csv.data[c++].push_back(mc.classification == SpectrumClass::continuous_unbounded);
    rows.push_back(row);
  }

  RunOutcome outcome;
  const std::string csv_path = out_path(config, ".csv");
  write_file(csv_path, format_csv(csv));
  outcome.files = {csv_path};
  outcome.manifest = {{"experiment", "classify"},
                      {"config", config},
                      {"config_hash", json_hash(config)},
                      {"version", kVersion},
                      {"rows", rows}};
  return outcome;
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  bool header_done = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        std::string key = line.substr(1, eq - 1);
        while (!key.empty() && key.front() == ' ') key.erase(key.begin());
        table.meta[key] = line.substr(eq + 1);
      }
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!header_done) {
      table.columns = cells;
      table.data.assign(cells.size(), {});
      header_done = true;
    } else {
      if (cells.size() != table.columns.size())
        throw ConfigError("csv: row with wrong number of cells");
      for (size_t i = 0; i < cells.size(); ++i) {
        try {
          table.data[i].push_back(std::stod(cells[i]));
        } catch (const std::exception&) {
          table.data[i].push_back(std::numeric_limits<double>::quiet_NaN());
        }
      }
    }
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read csv file " + path);
  std::ostringstream body;
  body << in.rdbuf();
  return parse_csv(body.str());
}

std::string format_csv(const CsvTable& table) {
  std::ostringstream os;
  for (const auto& [key, value] : table.meta) os << "# " << key << "=" << value << "\n";
  for (size_t i = 0; i < table.columns.size(); ++i)
    os << table.columns[i] << (i + 1 == table.columns.size() ? "\n" : ",");
  const size_t rows = table.data.empty() ? 0 : table.data[0].size();
  for (size_t r = 0; r < rows; ++r)
    for (size_t c = 0; c < table.data.size(); ++c)
      os << fmt(table.data[c][r]) << (c + 1 == table.data.size() ? "\n" : ",");
  return os.str();
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

std::string json_hash(const nlohmann::json& j) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

RunOutcome run_config(const nlohmann::json& config) {
  if (!config.is_object()) throw ConfigError("config: expected a JSON object");
  if (!config.contains("experiment")) throw ConfigError("config: missing 'experiment'");
  const std::string kind = config.at("experiment").get<std::string>();
  const auto start = std::chrono::steady_clock::now();
  RunOutcome outcome;
  if (kind == "dynamics")
    outcome = run_dynamics(config);
  else if (kind == "full_model")
    outcome = run_full_model(config);
  else if (kind == "spectrum")
    outcome = run_spectrum(config);
  else if (kind == "adiabatic")
    outcome = run_adiabatic(config);
  else if (kind == "measure")
    outcome = run_measure(config);
  else if (kind == "classify")
    outcome = run_classify(config);
  else
    throw ConfigError("config: unknown experiment '" + kind + "'");

  outcome.manifest["wall_time_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return outcome;
}

int run_experiment_file(const std::string& config_path, std::ostream& out, std::ostream& err) {
  nlohmann::json config;
  try {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot read config file " + config_path);
    in >> config;
  } catch (const nlohmann::json::exception& e) {
    err << "config parse error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return 2;
  }

  try {
    RunOutcome outcome = run_config(config);
    const std::string manifest_path = [&] {
      nlohmann::json c = config;
      return out_path(c, ".manifest.json");
    }();
    write_file(manifest_path, outcome.manifest.dump(2) + "\n");
    outcome.files.push_back(manifest_path);
    for (const auto& f : outcome.files) out << "wrote " << f << "\n";
    if (config.value("experiment", "") == "classify")
      for (const auto& row : outcome.manifest.at("rows"))
        out << "g=" << row.at("g").get<double>() << " omega=" << row.at("omega").get<double>()
            << " -> " << row.at("classification").get<std::string>()
            << " (margin " << row.at("margin").get<double>() << ")\n";
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ConvergenceError& e) {
    err << "convergence failure: " << e.what() << "\n";
    return 3;
  } catch (const BudgetError& e) {
    err << "budget exceeded: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

CompareOutcome compare_traces(const CsvTable& a, const CsvTable& b, const CompareOptions& opts) {
  const auto ha = a.meta.find("params_hash");
  const auto hb = b.meta.find("params_hash");
  if (!opts.force && ha != a.meta.end() && hb != b.meta.end() && ha->second != hb->second)
    throw ConfigError("compare: params_hash mismatch (physics parameters differ); use --force");

  auto col_index = [](const CsvTable& t, const std::string& name) {
    for (size_t i = 0; i < t.columns.size(); ++i)
      if (t.columns[i] == name) return long(i);
    return -1l;
  };
  const long ta = col_index(a, "t"), tb = col_index(b, "t");
  if (ta < 0 || tb < 0) throw ConfigError("compare: both traces need a 't' column");

  std::vector<std::pair<long, long>> shared;
  for (size_t i = 0; i < a.columns.size(); ++i) {
    if (long(i) == ta) continue;
    const long j = col_index(b, a.columns[i]);
    if (j >= 0) shared.emplace_back(long(i), j);
  }
  if (shared.empty()) throw ConfigError("compare: no shared observable columns");

  const std::vector<double>& grid_a = a.data[ta];
  const std::vector<double>& grid_b = b.data[tb];
  bool same_grid = grid_a.size() == grid_b.size();
  if (same_grid)
    for (size_t i = 0; i < grid_a.size(); ++i)
      same_grid = same_grid &&
                  std::abs(grid_a[i] - grid_b[i]) <= 1e-12 * std::max(1.0, std::abs(grid_a[i]));
  if (!same_grid && !opts.interpolate)
    throw ConfigError("compare: time grids differ; rerun with interpolation enabled");

  auto interp = [&](const std::vector<double>& col, double t) {
    if (t < grid_b.front() - 1e-12 || t > grid_b.back() + 1e-12)
      throw ConfigError("compare: interpolation target outside the second trace's range");
    const auto it = std::lower_bound(grid_b.begin(), grid_b.end(), t);
    if (it == grid_b.begin()) return col.front();
    if (it == grid_b.end()) return col.back();
    const size_t hi = size_t(it - grid_b.begin());
    const size_t lo = hi - 1;
    const double w = (t - grid_b[lo]) / (grid_b[hi] - grid_b[lo]);
    return (1.0 - w) * col[lo] + w * col[hi];
  };

  double sum_sq = 0.0, max_abs = 0.0;
  size_t count = 0;
  for (const auto& [ia, ib] : shared) {
    for (size_t r = 0; r < grid_a.size(); ++r) {
      const double va = a.data[ia][r];
      const double vb = same_grid ? b.data[ib][r] : interp(b.data[ib], grid_a[r]);
      const double d = std::abs(va - vb);
      sum_sq += d * d;
      max_abs = std::max(max_abs, d);
      ++count;
    }
  }

  CompareOutcome out;
  if (opts.metric == "rms")
    out.value = std::sqrt(sum_sq / double(count));
  else if (opts.metric == "max")
    out.value = max_abs;
  else
    throw ConfigError("compare: metric must be 'rms' or 'max'");
  out.pass = out.value <= opts.tol;
  std::ostringstream msg;
  msg << opts.metric << " deviation " << out.value << " over " << shared.size() << " columns, "
      << grid_a.size() << " samples: " << (out.pass ? "PASS" : "FAIL") << " (tol " << opts.tol
      << ")";
  out.message = msg.str();
  return out;
}

}  // namespace tpr
