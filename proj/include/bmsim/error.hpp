#pragma once

#include <stdexcept>
#include <string>

namespace bmsim {

/// Argument outside the mathematical domain of an operation (t > horizon, a <= 0, ...).
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Caller broke a documented precondition (restriction off-grid, t not a grid point).
class PreconditionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// GeneratorSpec is inconsistent with the requested construction.
class SpecError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Experiment config references an unknown name or carries an invalid value.
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace bmsim
