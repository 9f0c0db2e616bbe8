#pragma once

#include <stdexcept>
#include <string>

namespace fusim {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// bad configuration / input files
struct ConfigError : Error { using Error::Error; };
// caller violated a precondition
struct UsageError : Error { using Error::Error; };
// operation not valid in the object's current state
struct StateError : Error { using Error::Error; };
// matrix dimension mismatch
struct ShapeError : Error { using Error::Error; };
// non-finite values where finite ones are required
struct NumericError : Error { using Error::Error; };
// fused batch routed to a job without an adapter
struct RoutingError : Error { using Error::Error; };
// least-squares fit cannot proceed (rank deficiency, too few samples)
struct FitError : Error { using Error::Error; };

} // namespace fusim
