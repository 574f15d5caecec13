#pragma once

#include <stdexcept>
#include <string>

namespace thinwalk {

/// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
    Config,       // malformed input, violated precondition
    Domain,       // argument outside the mathematical domain of an operation
    Budget,       // enumeration or state budget exceeded
    Convergence,  // iterative solver did not reach its residual tolerance
    Undecided,    // an oracle returned UNKNOWN where a verdict was required
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

struct BudgetExceeded : Error {
    explicit BudgetExceeded(const std::string& what) : Error(ErrorKind::Budget, what) {}
};

struct ConvergenceFailure : Error {
    explicit ConvergenceFailure(const std::string& what) : Error(ErrorKind::Convergence, what) {}
};

struct UndecidedMembership : Error {
    explicit UndecidedMembership(const std::string& what) : Error(ErrorKind::Undecided, what) {}
};

/// 0 success, 2 config error, 3 budget/convergence error.
inline int exit_code_for(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Config:
        case ErrorKind::Domain: return 2;
        case ErrorKind::Budget:
        case ErrorKind::Convergence:
        case ErrorKind::Undecided: return 3;
    }
    return 1;
}

}  // namespace thinwalk
