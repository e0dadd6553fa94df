#pragma once

#include <stdexcept>
#include <string>

namespace chain {

// Exit codes used by the CLI; library exceptions map onto them 1:1.
enum class ExitCode : int {
    ok = 0,
    failure = 1,
    config = 2,
    regime = 3,
    blowup = 4,
    inconclusive = 5,
    geometry = 6,
    solver = 7,
};

struct Error : std::runtime_error {
    Error(ExitCode c, const std::string& msg) : std::runtime_error(msg), code(c) {}
    ExitCode code;
};

// Bad CLI arguments, malformed config files, invalid parameter combinations.
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(ExitCode::config, msg) {}
};

// Coupling below the synchronization threshold (or mu <= 1).
struct RegimeError : Error {
    explicit RegimeError(const std::string& msg) : Error(ExitCode::regime, msg) {}
};

// Vector length disagrees with the instance dimension.
struct DimensionError : ConfigError {
    explicit DimensionError(const std::string& msg) : ConfigError(msg) {}
};

// NaN/overflow in simulated state.
struct NumericalBlowupError : Error {
    explicit NumericalBlowupError(const std::string& msg) : Error(ExitCode::blowup, msg) {}
};

// All trajectories censored, or statistical error exceeds what the budget allows.
struct InconclusiveError : Error {
    explicit InconclusiveError(const std::string& msg) : Error(ExitCode::inconclusive, msg) {}
};

// Test-function geometry is inadmissible (e.g. profile strip overlaps the target balls).
struct GeometryError : Error {
    explicit GeometryError(const std::string& msg) : Error(ExitCode::geometry, msg) {}
};

// Quadrature failed to reach tolerance, or a linear solve did not converge.
struct SolverError : Error {
    explicit SolverError(const std::string& msg) : Error(ExitCode::solver, msg) {}
};

// Hermitian symmetry of a spectral vector is broken beyond round-off.
struct SymmetryError : ConfigError {
    explicit SymmetryError(const std::string& msg) : ConfigError(msg) {}
};

}  // namespace chain
