#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace psmcrb {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A numerical routine could not reach its tolerance (series cap, root bracket,
// vanishing denominator, ill-conditioned matrix).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Conditional quantities requested on a selection event of (numerically) zero
// probability.
class DegenerateSelection : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Invalid experiment description. `key()` names the offending config entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace psmcrb
