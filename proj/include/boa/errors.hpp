#pragma once

#include <stdexcept>
#include <string>

namespace boa {

// Error vocabulary shared across the library. Everything derives from
// std::runtime_error so callers can catch coarsely or precisely.

struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error("DomainError: " + msg) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error("ConfigError: " + msg) {}
};

struct GridMismatch : std::runtime_error {
    explicit GridMismatch(const std::string& msg) : std::runtime_error("GridMismatch: " + msg) {}
};

struct GapViolation : std::runtime_error {
    explicit GapViolation(const std::string& msg) : std::runtime_error("GapViolation: " + msg) {}
};

struct BasisError : std::runtime_error {
    explicit BasisError(const std::string& msg) : std::runtime_error("BasisError: " + msg) {}
};

struct NonOrthogonal : std::runtime_error {
    explicit NonOrthogonal(const std::string& msg) : std::runtime_error("NonOrthogonal: " + msg) {}
};

struct SingularNode : std::runtime_error {
    explicit SingularNode(const std::string& msg) : std::runtime_error("SingularNode: " + msg) {}
};

struct EnsembleError : std::runtime_error {
    explicit EnsembleError(const std::string& msg) : std::runtime_error("EnsembleError: " + msg) {}
};

struct AccuracyError : std::runtime_error {
    explicit AccuracyError(const std::string& msg) : std::runtime_error("AccuracyError: " + msg) {}
};

struct SupportError : std::runtime_error {
    explicit SupportError(const std::string& msg) : std::runtime_error("SupportError: " + msg) {}
};

struct BoundaryError : std::runtime_error {
    explicit BoundaryError(const std::string& msg) : std::runtime_error("BoundaryError: " + msg) {}
};

struct OrderError : std::runtime_error {
    explicit OrderError(const std::string& msg) : std::runtime_error("OrderError: " + msg) {}
};

struct DegenerateFit : std::runtime_error {
    explicit DegenerateFit(const std::string& msg) : std::runtime_error("DegenerateFit: " + msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error("IoError: " + msg) {}
};

}  // namespace boa
