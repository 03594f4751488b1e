#include "martapprox/error.hpp"

namespace martapprox {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidInput: return "InvalidInput";
        case ErrorCode::NonStochasticRow: return "NonStochasticRow";
        case ErrorCode::NotErgodic: return "NotErgodic";
        case ErrorCode::BadPi: return "BadPi";
        case ErrorCode::NotMeanZero: return "NotMeanZero";
        case ErrorCode::CrossCheckFailed: return "CrossCheckFailed";
        case ErrorCode::SingularSolve: return "SingularSolve";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::InsufficientHorizon: return "InsufficientHorizon";
        case ErrorCode::HorizonExceeded: return "HorizonExceeded";
        case ErrorCode::TailNotCertified: return "TailNotCertified";
        case ErrorCode::RaggedColumns: return "RaggedColumns";
        case ErrorCode::ZeroIndex: return "ZeroIndex";
        case ErrorCode::GridTooCoarse: return "GridTooCoarse";
        case ErrorCode::DegenerateKappa: return "DegenerateKappa";
        case ErrorCode::UsageError: return "UsageError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace martapprox
