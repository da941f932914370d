#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qi {

enum class ErrorCode {
    InvalidInput,
    DegenerateDistribution,
    NumericalInstability,
    RefusedAtScale,
    SamplerStalled,
    InternalInvariantViolation,
    EmptyUserHistory,
    UndefinedMetric,
    IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidInput: return "InvalidInput";
        case ErrorCode::DegenerateDistribution: return "DegenerateDistribution";
        case ErrorCode::NumericalInstability: return "NumericalInstability";
        case ErrorCode::RefusedAtScale: return "RefusedAtScale";
        case ErrorCode::SamplerStalled: return "SamplerStalled";
        case ErrorCode::InternalInvariantViolation: return "InternalInvariantViolation";
        case ErrorCode::EmptyUserHistory: return "EmptyUserHistory";
        case ErrorCode::UndefinedMetric: return "UndefinedMetric";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit status) can branch on the class of error.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, std::string_view what) {
    if (!condition) [[unlikely]] throw Error(code, std::string(what));
}

}  // namespace qi
