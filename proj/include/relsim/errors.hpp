#pragma once

#include <stdexcept>
#include <string>

namespace relsim {

/// Violated precondition on an input value: superluminal speed, malformed
/// transform, invalid configuration.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Failure that arises while evaluating a numerical quantity.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A world line was queried outside the span it can answer for.
class HistoryExhausted : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Observer closer to the source than the singularity radius.
class SingularField : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NonConvergence : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// An analysis did not receive enough samples or extrema to proceed.
class InsufficientData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace relsim
