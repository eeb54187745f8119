#include "twophase/errors.hpp"

namespace twophase {

const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Positivity: return "PositivityError";
    case ErrorCode::NumericalBlowup: return "NumericalBlowup";
    case ErrorCode::DegenerateDensity: return "DegenerateDensity";
    case ErrorCode::ConstraintViolation: return "ConstraintViolation";
    case ErrorCode::VacuumMismatch: return "VacuumMismatch";
    case ErrorCode::ZeroMass: return "ZeroMass";
    case ErrorCode::Config: return "ConfigError";
    case ErrorCode::Io: return "IoError";
    }
    return "Unknown";
}

} // namespace twophase
