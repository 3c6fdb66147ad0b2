#pragma once

#include <stdexcept>
#include <string>

namespace qrg {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input validation: a value is outside its documented domain.
struct DomainError : Error {
    using Error::Error;
};

// An enum-like string ("formula mode", "boundary kind", ...) has no match.
struct InvalidMode : Error {
    using Error::Error;
};

// The Morse/Casimir matching equation has no root in the search bracket.
struct NoMatchingPoint : Error {
    using Error::Error;
};

// An iterative procedure ran out of iterations before reaching tolerance.
struct NonConvergence : Error {
    using Error::Error;
};

// Over-determined beam parameters that contradict each other.
struct InconsistentSpec : Error {
    using Error::Error;
};

// Non-finite values appeared during propagation.
struct NumericalBlowup : Error {
    using Error::Error;
};

// The asymptotic matching system is numerically singular.
struct IllConditionedMatch : Error {
    using Error::Error;
};

// The staged absorber search found no parameters within tolerance.
struct CalibrationFailed : Error {
    using Error::Error;
};

// Config file is not valid JSON / has the wrong shape.
struct ParseError : Error {
    using Error::Error;
};

// Config parsed but violates a cross-field constraint.
struct ValidationError : Error {
    using Error::Error;
};

// A quantity string has a malformed number or an unknown unit.
struct UnitError : Error {
    using Error::Error;
};

} // namespace qrg
