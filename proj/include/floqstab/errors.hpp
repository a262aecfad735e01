#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace floqstab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// shape, index and layout problems
struct DimensionError : Error {
  using Error::Error;
};

// bad physical or numerical parameters supplied by the caller
struct ParameterError : Error {
  using Error::Error;
};

// an integration or decomposition missed its accuracy target
struct AccuracyError : Error {
  using Error::Error;
};

// bosonic truncation too small for the dynamics
struct TruncationError : Error {
  using Error::Error;
};

struct FitError : Error {
  using Error::Error;
};

// Non-fatal diagnostics (hierarchy violations, ignored dissipators, ...).
// The default handler writes to std::clog; passing an empty handler restores it.
using WarningHandler = std::function<void(const std::string&)>;
void set_warning_handler(WarningHandler handler);
void warn(const std::string& message);

}  // namespace floqstab
