#include "cfgrid/error.hpp"

namespace cfgrid {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::MagnitudeUnderflow: return "MagnitudeUnderflow";
        case ErrorKind::TooFewSamples: return "TooFewSamples";
        case ErrorKind::UnwrapAliasing: return "UnwrapAliasing";
        case ErrorKind::SchemaError: return "SchemaError";
        case ErrorKind::TopologyError: return "TopologyError";
        case ErrorKind::UnitError: return "UnitError";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::SingularAdmittance: return "SingularAdmittance";
        case ErrorKind::SingularChi: return "SingularChi";
        case ErrorKind::SingularBus: return "SingularBus";
        case ErrorKind::NonConvergence: return "NonConvergence";
        case ErrorKind::SingularJacobian: return "SingularJacobian";
        case ErrorKind::OverModulation: return "OverModulation";
        case ErrorKind::InitResidual: return "InitResidual";
        case ErrorKind::StepNonConvergence: return "StepNonConvergence";
        case ErrorKind::EventTargetMissing: return "EventTargetMissing";
        case ErrorKind::EmptyArea: return "EmptyArea";
        case ErrorKind::ColumnNotFound: return "ColumnNotFound";
        case ErrorKind::EmptyData: return "EmptyData";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace cfgrid
