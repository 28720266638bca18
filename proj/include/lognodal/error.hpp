#pragma once

#include <stdexcept>
#include <string>

namespace lognodal {

/// Numerical failure inside a solver (no bracket, stagnation, step underflow).
/// Invalid arguments are reported with std::invalid_argument instead.
class SolverError : public std::runtime_error {
public:
  explicit SolverError(const std::string& what, std::string detail = {})
      : std::runtime_error(what), detail_(std::move(detail)) {}

  /// Free-form diagnostic dump (scan tables, final simplex, ...).
  const std::string& detail() const noexcept { return detail_; }

private:
  std::string detail_;
};

} // namespace lognodal
