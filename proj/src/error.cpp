#include "oritube/error.hpp"

namespace oritube {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::DegeneratePolygon: return "DegeneratePolygon";
        case ErrorCode::DegenerateAngles: return "DegenerateAngles";
        case ErrorCode::InadmissibleSection: return "InadmissibleSection";
        case ErrorCode::DegenerateSpec: return "DegenerateSpec";
        case ErrorCode::NonUnrollable: return "NonUnrollable";
        case ErrorCode::InterfaceMismatch: return "InterfaceMismatch";
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::EmptyMesh: return "EmptyMesh";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::NotOneDof: return "NotOneDof";
        case ErrorCode::OpenSurface: return "OpenSurface";
        case ErrorCode::InvalidMaterial: return "InvalidMaterial";
        case ErrorCode::UnderConstrained: return "UnderConstrained";
        case ErrorCode::Unsupported: return "Unsupported";
        case ErrorCode::IncompressibilityViolated: return "IncompressibilityViolated";
        case ErrorCode::MalformedCsv: return "MalformedCsv";
        case ErrorCode::NonPositiveGeometry: return "NonPositiveGeometry";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::MissingColumn: return "MissingColumn";
        case ErrorCode::NoPlateau: return "NoPlateau";
        case ErrorCode::DuplicatePressure: return "DuplicatePressure";
        case ErrorCode::InsufficientRounds: return "InsufficientRounds";
        case ErrorCode::UnknownMaterial: return "UnknownMaterial";
        case ErrorCode::EmptySeries: return "EmptySeries";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

}  // namespace oritube
