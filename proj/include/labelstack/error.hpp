#pragma once

#include <stdexcept>
#include <string>

namespace labelstack {

/// Bad input data: malformed CSV, schema violations, degenerate columns.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller passed arguments outside an operation's contract.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical or algebraic invariant that should always hold did not.
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Linear system could not be solved stably.
class SingularSystem : public DataError {
public:
    using DataError::DataError;
};

}  // namespace labelstack
