// Copyright (c) 2026 the evimae authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace evimae {

// Base class for all library errors. Subclasses mirror the failure modes of
// the public operations; the CLI maps them onto exit codes (config=2,
// data=3, runtime=4).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Data / IO errors (CLI exit code 3).
struct IoError : Error {
  using Error::Error;
};
struct MissingFile : IoError {
  using IoError::IoError;
};
struct ParseError : IoError {
  using IoError::IoError;
};
struct ManifestMismatch : IoError {
  using IoError::IoError;
};

// Configuration errors (CLI exit code 2).
struct ConfigError : Error {
  using Error::Error;
};
struct UnknownDevice : ConfigError {
  using ConfigError::ConfigError;
};

// Contract violations at runtime (CLI exit code 4).
struct InvalidParam : Error {
  using Error::Error;
};
struct ShapeError : Error {
  using Error::Error;
};
struct IndexError : Error {
  using Error::Error;
};
struct AllNaN : Error {
  using Error::Error;
};
struct TooFewFrames : Error {
  using Error::Error;
};
struct ZeroNorm : Error {
  using Error::Error;
};
struct EmptyMask : Error {
  using Error::Error;
};
struct EmptyGroup : Error {
  using Error::Error;
};
struct EmptySplit : Error {
  using Error::Error;
};

}  // namespace evimae
