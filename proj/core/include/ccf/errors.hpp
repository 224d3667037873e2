#pragma once

#include <stdexcept>
#include <string>

namespace ccf {

/// Bad run configuration: unknown columns, degenerate splits, invalid grids.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Input data violates the expected layout or quality (non-finite values,
/// ragged CSV rows, model/data column mismatch).
class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure: singular designs, non-finite determinants, solvers
/// that cannot make progress even after the documented fallbacks.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// CLI exit-code contract.
inline constexpr int exit_ok = 0;
inline constexpr int exit_config_error = 2;
inline constexpr int exit_schema_error = 3;
inline constexpr int exit_numeric_error = 4;

} // namespace ccf
