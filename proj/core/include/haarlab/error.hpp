#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace haarlab {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A node, grid or resolution does not fit the grid it is used with.
class GridError : public Error {
 public:
  using Error::Error;
};

/// Malformed input: bad parameters, files, or operator specs.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An iterative procedure (calibration, norm estimation) gave up.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A proven inequality or identity failed numerically. Indicates a bug in
/// the implementation, not a property of the input.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// A hypothesis on the input failed; `witness()` is a point exhibiting it.
class WitnessError : public Error {
 public:
  WitnessError(const std::string& what, std::vector<double> witness)
      : Error(what), witness_(std::move(witness)) {}
  const std::vector<double>& witness() const noexcept { return witness_; }

 private:
  std::vector<double> witness_;
};

}  // namespace haarlab
