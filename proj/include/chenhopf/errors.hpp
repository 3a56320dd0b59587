#pragma once

#include <stdexcept>
#include <string>

namespace chenhopf {

/// Root of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition (bad step, too few nodes, ...).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Parameters fall outside the regime an operation needs
/// (hyperbolic instead of elliptic, a = 0, a + d = 0, d = 0, ...).
class RegimeError : public Error {
public:
    using Error::Error;
};

/// A model hypothesis needed for the averaged zeros does not hold.
class HypothesisError : public Error {
public:
    using Error::Error;
};

/// Non-finite value produced where a finite one was required.
class NonFiniteError : public Error {
public:
    using Error::Error;
};

class SingularMatrixError : public Error {
public:
    using Error::Error;
};

/// Iterative procedure failed to converge.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Orbit bookkeeping misuse, e.g. unscaling an orbit twice.
class FrameError : public Error {
public:
    using Error::Error;
};

}  // namespace chenhopf
