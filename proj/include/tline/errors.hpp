#pragma once

#include <stdexcept>
#include <string>

namespace tline {

/// Bad input: out-of-range parameter, malformed config, inconsistent sizes.
/// `key()` names the offending field when one is known.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& message, std::string key = {})
      : std::invalid_argument(message), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Input is well formed but outside the region where the model is valid
/// (e.g. a taut line, non-positive resistivity factor).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Linear solve broke down (zero/negative pivot, non-finite result).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tline
