#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace martapprox {

/// Stable, machine-readable failure codes. The string form returned by
/// `to_string` is part of the CLI contract and must not change.
enum class ErrorCode {
    InvalidInput,
    NonStochasticRow,
    NotErgodic,
    BadPi,
    NotMeanZero,
    CrossCheckFailed,
    SingularSolve,
    NoConvergence,
    InsufficientHorizon,
    HorizonExceeded,
    TailNotCertified,
    RaggedColumns,
    ZeroIndex,
    GridTooCoarse,
    DegenerateKappa,
    UsageError,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string path = {})
        : std::runtime_error(message), code_(code), path_(std::move(path)) {}

    ErrorCode code() const noexcept { return code_; }

    /// Location of the offending input, e.g. "Q[1]" or "chain.json:pi".
    /// Empty when the failure is not tied to a specific field.
    const std::string& path() const noexcept { return path_; }

    Error with_path_prefix(const std::string& prefix) const {
        return Error(code_, what(), path_.empty() ? prefix : prefix + ":" + path_);
    }

private:
    ErrorCode code_;
    std::string path_;
};

}  // namespace martapprox
