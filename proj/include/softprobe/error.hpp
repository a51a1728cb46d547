#pragma once

#include <stdexcept>
#include <string>

namespace softprobe {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A documented precondition or postcondition was violated (dimension
// mismatches, backends writing outside their mask, broken invariants).
class ContractViolationError : public Error {
 public:
  using Error::Error;
};

// Invalid or inconsistent configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A model was used before it was trained / loaded.
class NotReadyError : public Error {
 public:
  using Error::Error;
};

// A capability the operation needs is missing (e.g. input gradients
// requested from a non-differentiable classifier).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

// A score or statistic is undefined for the given inputs
// (zero reference AUC, zero embedding, single-class score set).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

// File system / codec failures, with the offending path in the message.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace softprobe
