#pragma once

#include <stdexcept>
#include <string>

namespace autofield {

// Error taxonomy, mapped to CLI exit codes in tools/: ConfigError -> 2,
// everything else -> 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user-facing configuration: bad config keys, out-of-range K, ...
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input data; message carries the offending line where known.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Broken API precondition (shape mismatch, stale record, bad label).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Non-finite value encountered during training.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Metric undefined for the given input (e.g. AUC on a single class).
class MetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace autofield
