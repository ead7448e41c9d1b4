#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pdmp {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A point was expected to lie in the open state space E.
class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// The flow produced a non-finite state.
class NumericalFlowError : public Error {
 public:
  using Error::Error;
};

// A model callback broke its contract (sampler left E, rate bound violated, ...).
class ModelContractError : public Error {
 public:
  using Error::Error;
};

class SimulationError : public Error {
 public:
  SimulationError(const std::string& what, std::size_t index = npos)
      : Error(what), index_(index) {}

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  // Index of the chain record being generated when the failure happened.
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

// No validation/main data near the reverse curve: the criterion is zero everywhere.
class SelectionImpossible : public Error {
 public:
  using Error::Error;
};

// Malformed input files (chains, crack histories, reports).
class DataError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace pdmp
