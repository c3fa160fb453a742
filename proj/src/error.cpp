#include "callias/error.hpp"

namespace callias {

const char* kind_name(ErrorKind k)
{
    switch (k) {
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::AssumptionViolation: return "AssumptionViolation";
    case ErrorKind::CollarViolation: return "CollarViolation";
    case ErrorKind::SupportViolation: return "SupportViolation";
    case ErrorKind::NotCallias: return "NotCallias";
    case ErrorKind::CompactDomain: return "CompactDomain";
    case ErrorKind::ResolutionTooLow: return "ResolutionTooLow";
    case ErrorKind::GridModelMismatch: return "GridModelMismatch";
    case ErrorKind::StepCountTooLow: return "StepCountTooLow";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::SystemTooLarge: return "SystemTooLarge";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::AmbiguousKernel: return "AmbiguousKernel";
    case ErrorKind::ContourHitsSpectrum: return "ContourHitsSpectrum";
    case ErrorKind::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::TrackMatchingAmbiguous: return "TrackMatchingAmbiguous";
    case ErrorKind::WindowUnreliable: return "WindowUnreliable";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::IdentityViolation: return "IdentityViolation";
    }
    return "Error";
}

int exit_code(ErrorKind k)
{
    switch (k) {
    case ErrorKind::Config:
    case ErrorKind::AssumptionViolation:
    case ErrorKind::CollarViolation:
    case ErrorKind::SupportViolation:
    case ErrorKind::NotCallias:
    case ErrorKind::CompactDomain:
    case ErrorKind::ResolutionTooLow:
    case ErrorKind::GridModelMismatch:
    case ErrorKind::StepCountTooLow:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::SystemTooLarge:
        return 1;
    case ErrorKind::IdentityViolation:
        return 3;
    default:
        return 2;
    }
}

Error::Error(ErrorKind kind, const std::string& msg)
    : std::runtime_error(msg), kind_(kind)
{
}

void fail(ErrorKind kind, const std::string& msg)
{
    throw Error(kind, msg);
}

}  // namespace callias
