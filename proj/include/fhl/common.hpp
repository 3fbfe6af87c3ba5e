#pragma once

#include <stdexcept>
#include <string>

namespace fhl {

/// Raised when a run configuration is structurally invalid (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a numerical routine cannot produce a trustworthy result
/// (non-convergent quadrature, empty conditioned sample, ...; CLI exit code 3).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Write-to-temp-then-rename so readers never observe a partial file.
void atomic_write_file(const std::string& path, const std::string& content);

} // namespace fhl
