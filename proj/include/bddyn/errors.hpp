#pragma once

#include <stdexcept>
#include <string>

namespace bddyn {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite or out-of-octant numeric input.
struct DomainError : Error {
    using Error::Error;
};

// Caller asked for something the operation does not accept
// (wrong equilibrium kind, bad index, interval violation).
struct UsageError : Error {
    using Error::Error;
};

// A quantity could not be evaluated at the requested growth rate.
struct EvaluationError : Error {
    EvaluationError(const std::string& what, double r_value) : Error(what), r(r_value) {}
    double r;
};

// Invalid configuration document or command line; the message names the key.
struct ConfigError : Error {
    using Error::Error;
};

struct NoBifurcationInBracket : Error {
    using Error::Error;
};

struct NotAHopfPoint : Error {
    using Error::Error;
};

struct SingularBasisError : Error {
    using Error::Error;
};

struct DegenerateHopfError : Error {
    using Error::Error;
};

}  // namespace bddyn
