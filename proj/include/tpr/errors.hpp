#ifndef TPR_ERRORS_HPP
#define TPR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tpr {

/// Invalid or unparseable experiment configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative method or truncation failed to meet its tolerance (exit 3).
struct ConvergenceError : std::runtime_error {
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// A resource budget (memory, cutoff schedule) was exhausted (exit 4).
struct BudgetError : std::runtime_error {
  explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tpr

#endif
