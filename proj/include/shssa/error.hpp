#pragma once

#include <stdexcept>
#include <string>

namespace shssa {

/// Broad failure class; the CLI maps it onto its exit code.
enum class ErrorKind {
    input,     ///< malformed data or shapes (exit 2)
    numerical, ///< convergence, rank deficiency, ill-conditioning (exit 3)
    config,    ///< inconsistent parameters (exit 4)
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ArithmeticError : Error {
    explicit ArithmeticError(const std::string& what) : Error(ErrorKind::input, what) {}
};

struct TopologyError : Error {
    explicit TopologyError(const std::string& what) : Error(ErrorKind::input, what) {}
};

struct ShapeError : Error {
    explicit ShapeError(const std::string& what) : Error(ErrorKind::input, what) {}
};

/// The window admits no origin inside the region (K = 0).
struct WindowError : Error {
    explicit WindowError(const std::string& what) : Error(ErrorKind::config, what) {}
};

/// A matrix handed to unembedding is not quasi-Hankel.
struct StructureError : Error {
    explicit StructureError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

struct NumericalError : Error {
    explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

struct RankDeficiencyError : NumericalError {
    using NumericalError::NumericalError;
};

struct PairingError : NumericalError {
    PairingError(const std::string& what, double condition)
        : NumericalError(what), condition_(condition) {}

    [[nodiscard]] double condition() const noexcept { return condition_; }

private:
    double condition_;
};

struct FormatError : Error {
    explicit FormatError(const std::string& what) : Error(ErrorKind::input, what) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

} // namespace shssa
