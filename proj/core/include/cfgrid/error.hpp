#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cfgrid {

enum class ErrorKind {
    InvalidArgument,
    MagnitudeUnderflow,
    TooFewSamples,
    UnwrapAliasing,
    SchemaError,
    TopologyError,
    UnitError,
    DimensionMismatch,
    SingularAdmittance,
    SingularChi,
    SingularBus,
    NonConvergence,
    SingularJacobian,
    OverModulation,
    InitResidual,
    StepNonConvergence,
    EventTargetMissing,
    EmptyArea,
    ColumnNotFound,
    EmptyData,
    IoError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure in the library surfaces as this exception.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace cfgrid
