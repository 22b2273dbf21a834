#pragma once

#include <stdexcept>
#include <string>

namespace dualstab {

// Base of every error raised by the library. The CLI maps the subclasses onto
// exit codes: BoundViolated -> 1, ConfigError -> 2, anything else -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotSpd : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class DegeneratePencil : public Error {
 public:
  using Error::Error;
};

class SingularSystem : public Error {
 public:
  SingularSystem(const std::string& what, double sigma_ratio)
      : Error(what), sigma_ratio_(sigma_ratio) {}
  /// smallest / largest singular value of the offending matrix
  double sigma_ratio() const noexcept { return sigma_ratio_; }

 private:
  double sigma_ratio_;
};

class GammaZero : public Error {
 public:
  using Error::Error;
};

class NestingViolated : public Error {
 public:
  using Error::Error;
};

class PreconditionViolated : public Error {
 public:
  using Error::Error;
};

class DegenerateDenominator : public Error {
 public:
  DegenerateDenominator(const std::string& what, double error)
      : Error(what), error_(error) {}
  /// discrete error measured when the best-approximation sum vanished
  double error() const noexcept { return error_; }

 private:
  double error_;
};

// A verified inequality failed. Carries the measured value and the bound it
// was checked against.
class BoundViolated : public Error {
 public:
  BoundViolated(const std::string& check, double measured, double bound)
      : Error(check + ": measured " + std::to_string(measured) +
              " violates bound " + std::to_string(bound)),
        check_(check),
        measured_(measured),
        bound_(bound) {}
  const std::string& check() const noexcept { return check_; }
  double measured() const noexcept { return measured_; }
  double bound() const noexcept { return bound_; }

 private:
  std::string check_;
  double measured_;
  double bound_;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : Error(field + ": " + message), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace dualstab
