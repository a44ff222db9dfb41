#pragma once

#include <stdexcept>
#include <string>

namespace bptem {

// Base of everything the library throws on purpose.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
public:
  using Error::Error;
};

// Mismatched grids or lengths.
class ShapeError : public Error {
public:
  using Error::Error;
};

// |s| exceeded the encoder bound c.
class AmplitudeError : public Error {
public:
  using Error::Error;
};

class InsufficientDataError : public Error {
public:
  using Error::Error;
};

class DegenerateQuantizationError : public Error {
public:
  using Error::Error;
};

class DivergenceError : public Error {
public:
  using Error::Error;
};

// Raised when the residual keeps growing; usually the wrong gain convention.
class OperatorConventionError : public DivergenceError {
public:
  using DivergenceError::DivergenceError;
};

class SizeError : public Error {
public:
  using Error::Error;
};

class RankCollapseError : public Error {
public:
  using Error::Error;
};

class MetricError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

// A Monte Carlo trial failed; carries the seed that reproduces it.
class TrialError : public Error {
public:
  TrialError(unsigned long long seed, const std::string& what)
      : Error("trial with seed " + std::to_string(seed) + " failed: " + what), seed_(seed) {}
  unsigned long long seed() const noexcept { return seed_; }

private:
  unsigned long long seed_;
};

} // namespace bptem
