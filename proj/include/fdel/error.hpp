#pragma once

#include <stdexcept>
#include <string>

namespace fdel {

/// Malformed or out-of-domain user input (bad series, bad grammar, bad model).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A request that is well formed but not meaningful (e.g. a df = 0 test).
class InvalidRequest : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An operation was combined with a system that lacks what it needs.
class ConfigurationError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Evaluating a long-memory density at the zero frequency.
class PoleError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Circulant embedding produced negative eigenvalues at every tried size.
class EmbeddingFailure : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

/// Zero is not interior to the convex hull of the constraint vectors.
class Infeasible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// No feasible parameter was found by an outer search.
class EstimationFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fdel
