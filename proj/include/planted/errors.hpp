#pragma once

#include <stdexcept>
#include <string>

namespace planted {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A projection/implication was asked about a variable outside the tuple.
struct SubsetViolation : Error {
    using Error::Error;
};

// A partial assignment's length does not match the arity it is used at.
struct ArityMismatch : Error {
    using Error::Error;
};

struct LengthMismatch : Error {
    using Error::Error;
};

// UniformCover requested with alpha above the feasibility threshold: the
// complement distribution would need negative mass on some review vector.
struct AdversaryInfeasible : Error {
    using Error::Error;
};

struct BudgetExhausted : Error {
    using Error::Error;
};

// An exhaustive routine was asked to run past its configured size cap.
struct TooLarge : Error {
    using Error::Error;
};

// No review vector cleared the frequency threshold for some tuple; the
// dataset carries no constraint there. Recoverable: recovery converts it
// into a structured failure instead of an answer.
struct EmptyConstraintError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace planted
