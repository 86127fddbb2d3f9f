#pragma once

#include <stdexcept>
#include <string>

namespace kirchhoff {

/// The nonlocal argument s left the admissible interval J of the coefficient.
class DomainError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A coefficient evaluation produced m(s) <= 0 (misconfigured custom family).
class PositivityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A value fell outside the range of an inverse map, e.g. y >= sup M when
/// inverting the antiderivative. Signals that a smallness hypothesis fails.
class RangeError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent run configuration. Carries the offending key path.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
  ConfigError(const std::string& path, const std::string& reason)
      : std::runtime_error("config error at '" + path + "': " + reason) {}
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace kirchhoff
