#pragma once

#include <stdexcept>
#include <string>

namespace rampc {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad user-supplied configuration (unknown trajectory name, missing facets, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A polytope that was required to be nonempty turned out empty.
class EmptySetError : public Error {
public:
    using Error::Error;
};

/// An LP was unbounded in a direction where a finite value was required.
class UnboundedError : public Error {
public:
    using Error::Error;
};

/// Numerical solver failure (iteration cap, lost precision).
class SolverError : public Error {
public:
    using Error::Error;
};

/// Measurement data contradicts the prior envelope or the noise bound:
/// the feasible system set would become empty.
class AssumptionViolation : public Error {
public:
    using Error::Error;
};

/// The per-step optimal control problem lost feasibility.
class FeasibilityLoss : public Error {
public:
    FeasibilityLoss(const std::string& msg, long step_index)
        : Error(msg), step(step_index) {}
    long step;
};

/// Post-solve audit failed; indicates a bug, not a modeling condition.
class InternalError : public Error {
public:
    using Error::Error;
};

} // namespace rampc
