#pragma once

#include <stdexcept>

namespace tripem {

// Error taxonomy. The CLI maps UsageError/ConfigError/DataError to exit
// code 2 and TrainingError to exit code 3.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller passed arguments that can never be valid (bad index, empty list, ...).
struct UsageError : Error {
  using Error::Error;
};

// Inconsistent configuration: mismatched shapes, invalid hyperparameters.
struct ConfigError : Error {
  using Error::Error;
};

// Malformed or impossible input data (files, masks, labels).
struct DataError : Error {
  using Error::Error;
};

// A sampler could not produce a triplet from the given labels.
struct SamplingError : Error {
  using Error::Error;
};

// Training diverged or hit a non-finite value; surfaced to the caller.
struct TrainingError : Error {
  using Error::Error;
};

}  // namespace tripem
