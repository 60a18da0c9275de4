#pragma once

#include <stdexcept>
#include <string>

namespace gated {

/// Malformed or inconsistent experiment/network description.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine failed to reach its stated accuracy.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Loss evaluated outside of its domain, e.g. log-loss at a non-positive output.
class LossDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Brute-force enumeration refused because the instance is too large.
class OracleLimitError : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace gated
