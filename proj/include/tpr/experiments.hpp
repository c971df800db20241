#ifndef TPR_EXPERIMENTS_HPP
#define TPR_EXPERIMENTS_HPP

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace tpr {

/// Column-oriented CSV with `# key=value` metadata lines.
struct CsvTable {
  std::map<std::string, std::string> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> data;  // [column][row]
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv_file(const std::string& path);
std::string format_csv(const CsvTable& table);

std::uint64_t fnv1a(const std::string& text);
std::string json_hash(const nlohmann::json& j);

struct RunOutcome {
  std::vector<std::string> files;
  nlohmann::json manifest;
};

/// Executes a validated experiment configuration and writes its artifacts.
/// Throws ConfigError / ConvergenceError / BudgetError on failure.
RunOutcome run_config(const nlohmann::json& config);

/// CLI entry point: loads the file, runs it, prints a summary, and maps
/// exceptions onto exit codes (0 ok, 2 config, 3 convergence, 4 budget).
int run_experiment_file(const std::string& config_path, std::ostream& out, std::ostream& err);

struct CompareOptions {
  std::string metric = "rms";  // or "max"
  double tol = 0.0;
  bool force = false;        // ignore params_hash mismatch
  bool interpolate = false;  // linearly interpolate b onto a's time grid
};

struct CompareOutcome {
  bool pass;
  double value;
  std::string message;
};

CompareOutcome compare_traces(const CsvTable& a, const CsvTable& b, const CompareOptions& opts);

}  // namespace tpr

#endif
