#pragma once

#include <stdexcept>
#include <string>

namespace forge {

// Base class for all arithmetic/verification failures. CLI maps subclasses
// to exit codes: IdentityViolation -> 2, PrecisionExhausted -> 3, BadInput -> 4.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BadInput : Error { using Error::Error; };
struct PrecisionExhausted : Error { using Error::Error; };
struct IdentityViolation : Error { using Error::Error; };

struct NotDivisible : BadInput { using BadInput::BadInput; };
struct NotAUnit : BadInput { using BadInput::BadInput; };
struct NotInvertible : BadInput { using BadInput::BadInput; };
struct SeedInvalid : BadInput { using BadInput::BadInput; };
struct LambdaNotDivisible : BadInput { using BadInput::BadInput; };
struct Pi3NotDividingQ : BadInput { using BadInput::BadInput; };
struct QTooSmall : BadInput { using BadInput::BadInput; };
struct ConstantTermNotTopologicallyNilpotent : BadInput { using BadInput::BadInput; };

struct IntegralityViolation : IdentityViolation { using IdentityViolation::IdentityViolation; };
struct DescentFailure : IdentityViolation { using IdentityViolation::IdentityViolation; };
struct NoConvergence : IdentityViolation { using IdentityViolation::IdentityViolation; };
struct NotInKernel : IdentityViolation { using IdentityViolation::IdentityViolation; };
struct NotInC : IdentityViolation { using IdentityViolation::IdentityViolation; };
struct NotNormCompatible : IdentityViolation { using IdentityViolation::IdentityViolation; };
struct DivisibilityViolation : IdentityViolation { using IdentityViolation::IdentityViolation; };
struct DigitFailure : PrecisionExhausted { using PrecisionExhausted::PrecisionExhausted; };
struct DistinctnessFailure : PrecisionExhausted { using PrecisionExhausted::PrecisionExhausted; };
struct NoSolutionAtPrecision : PrecisionExhausted { using PrecisionExhausted::PrecisionExhausted; };

} // namespace forge
