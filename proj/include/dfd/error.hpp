// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>

namespace dfd {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A value outside the mathematical domain of an operation (e.g. depth <= 0).
struct DomainError : Error {
  using Error::Error;
};

/// Mismatched or degenerate field dimensions.
struct ShapeError : Error {
  using Error::Error;
};

/// Invalid configuration, preset, or manifest.
struct ConfigError : Error {
  using Error::Error;
};

/// File system or codec failure.
struct IoError : Error {
  using Error::Error;
};

/// Non-finite value produced during optimization.
struct SolverFault : Error {
  using Error::Error;
};

/// Metric evaluation impossible (e.g. no valid pixels).
struct EvalError : Error {
  using Error::Error;
};

}  // namespace dfd
