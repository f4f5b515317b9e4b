#pragma once

#include <stdexcept>
#include <string>

namespace reslab {

// Argument outside the mathematical domain of an operation (bad modulus,
// energy level on the wrong side, trap that does not exist, ...).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Parameters outside the regime a construction is defined for
// (no resonance on the requested branch, fewer than five fixed points, ...).
class RegimeError : public std::runtime_error {
public:
    explicit RegimeError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical procedure could not deliver its post-condition
// (orbit did not close, shot stalled, overflow guard tripped, ...).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace reslab
