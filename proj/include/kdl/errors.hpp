#pragma once

#include <stdexcept>
#include <string>

namespace kdl {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// graph
struct NonSquareMatrix : Error { using Error::Error; };
struct SelfLoopPresent : Error { using Error::Error; };

// model / integrator
struct AccessorOutOfRange : Error { using Error::Error; };
struct OutOfRange : Error { using Error::Error; };
struct StepTooLarge : Error { using Error::Error; };
struct NonFiniteState : Error { using Error::Error; };

// diagnostics
struct KExceedsM : Error { using Error::Error; };
struct EtaTooSmall : Error { using Error::Error; };
struct PreconditionViolated : Error { using Error::Error; };

// certificates
struct CertificateInvalid : Error { using Error::Error; };
struct HorizonTooShort : Error { using Error::Error; };
struct NotAllToAll : Error { using Error::Error; };
struct ZeroDelay : Error { using Error::Error; };
struct InsufficientSamples : Error { using Error::Error; };

// config / io
struct ParseError : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct NegativeValue : Error { using Error::Error; };
struct UnknownScenario : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

} // namespace kdl
