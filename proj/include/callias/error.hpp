#pragma once

#include <stdexcept>
#include <string>

namespace callias {

enum class ErrorKind {
    Config,
    AssumptionViolation,
    CollarViolation,
    SupportViolation,
    NotCallias,
    CompactDomain,
    ResolutionTooLow,
    GridModelMismatch,
    StepCountTooLow,
    DimensionMismatch,
    SystemTooLarge,
    ConvergenceFailure,
    AmbiguousKernel,
    ContourHitsSpectrum,
    QuadratureNotConverged,
    NotConverged,
    TrackMatchingAmbiguous,
    WindowUnreliable,
    InvariantViolation,
    IdentityViolation,
};

const char* kind_name(ErrorKind k);

// 1 = configuration/validation, 2 = numerical failure, 3 = identity violation.
int exit_code(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg);
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& msg);

}  // namespace callias
