#pragma once

#include <stdexcept>
#include <string>

namespace twophase {

enum class ErrorCode {
    InvalidArgument,
    Positivity,
    NumericalBlowup,
    DegenerateDensity,
    ConstraintViolation,
    VacuumMismatch,
    ZeroMass,
    Config,
    Io,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

class PositivityError : public Error {
public:
    explicit PositivityError(const std::string& what) : Error(ErrorCode::Positivity, what) {}
};

class NumericalBlowup : public Error {
public:
    explicit NumericalBlowup(const std::string& what) : Error(ErrorCode::NumericalBlowup, what) {}
};

class DegenerateDensity : public Error {
public:
    explicit DegenerateDensity(const std::string& what)
        : Error(ErrorCode::DegenerateDensity, what) {}
};

class ConstraintViolation : public Error {
public:
    explicit ConstraintViolation(const std::string& what)
        : Error(ErrorCode::ConstraintViolation, what) {}
};

class VacuumMismatch : public Error {
public:
    explicit VacuumMismatch(const std::string& what) : Error(ErrorCode::VacuumMismatch, what) {}
};

class ZeroMass : public Error {
public:
    explicit ZeroMass(const std::string& what) : Error(ErrorCode::ZeroMass, what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorCode::Config, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorCode::Io, what) {}
};

} // namespace twophase
