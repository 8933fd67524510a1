#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oritube {

enum class ErrorCode {
    DegeneratePolygon,
    DegenerateAngles,
    InadmissibleSection,
    DegenerateSpec,
    NonUnrollable,
    InterfaceMismatch,
    IoFailure,
    EmptyMesh,
    NoConvergence,
    NotOneDof,
    OpenSurface,
    InvalidMaterial,
    UnderConstrained,
    Unsupported,
    IncompressibilityViolated,
    MalformedCsv,
    NonPositiveGeometry,
    InsufficientData,
    MissingColumn,
    NoPlateau,
    DuplicatePressure,
    InsufficientRounds,
    UnknownMaterial,
    EmptySeries,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace oritube
