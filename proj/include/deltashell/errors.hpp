#pragma once

#include <stdexcept>
#include <string>

namespace deltashell {

// Exceptions map onto the CLI exit codes: DomainError -> 2 (bad input),
// ConvergenceError -> 3, DataError -> 4.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

// Raised when an evaluation point sits on (or numerically next to) a zero of
// the scattering denominator.
class PoleProximityError : public ConvergenceError {
public:
    using ConvergenceError::ConvergenceError;
};

} // namespace deltashell
