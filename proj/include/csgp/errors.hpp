#ifndef CSGP_ERRORS_HPP_
#define CSGP_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace csgp {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Input outside its mathematical domain (e.g. action outside [0,1]).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(what) {}
};

// Mismatched vector/matrix dimensions.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(what) {}
};

// Numerical linear algebra failure (non-PD matrix after jitter escalation).
class LinalgError : public Error {
 public:
  explicit LinalgError(const std::string& what) : Error(what) {}
};

// MCMC sampler failure: infeasible truncation spec or slice collapse.
class SamplerError : public Error {
 public:
  explicit SamplerError(const std::string& what) : Error(what) {}
};

// Invalid experiment configuration.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace csgp

#endif  // CSGP_ERRORS_HPP_
