#pragma once

#include <stdexcept>
#include <string>

namespace isovar {

/// Bad arguments: out-of-domain parameters, mismatched lengths, out-of-range
/// times.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical breakdown at run time: sampler iteration cap, divergence of the
/// variance path, integrator step underflow, vector-field singularity.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or incomplete run configuration. `field()` names the offending
/// key as `section.key`.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace isovar
