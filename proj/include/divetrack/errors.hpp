#pragma once

#include <stdexcept>
#include <string>

namespace divetrack {

// Base for all pipeline errors. The CLI maps subclasses to exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user input: missing frames, unreadable files, mismatched geometry.
struct InputError : Error {
  using Error::Error;
};

// The pipeline ran but produced nothing usable (no subject, no samples).
struct EmptyResultError : Error {
  using Error::Error;
};

struct OutOfBounds : Error {
  using Error::Error;
};
struct ImageTooSmall : Error {
  using Error::Error;
};
struct GeometryMismatch : Error {
  using Error::Error;
};

struct NoFrames : InputError {
  using InputError::InputError;
};
struct MixedGeometry : InputError {
  using InputError::InputError;
};
struct UnreadableFrame : InputError {
  using InputError::InputError;
};
struct BadRate : InputError {
  using InputError::InputError;
};

struct Degenerate : Error {
  using Error::Error;
};
struct NoConsensus : Error {
  using Error::Error;
};
struct Singular : Error {
  using Error::Error;
};

struct EmptyInput : Error {
  using Error::Error;
};
struct NoSubject : EmptyResultError {
  using EmptyResultError::EmptyResultError;
};
struct NoValidSamples : EmptyResultError {
  using EmptyResultError::EmptyResultError;
};
struct BadWindow : Error {
  using Error::Error;
};
struct NoEntry : Error {
  using Error::Error;
};
struct LengthMismatch : Error {
  using Error::Error;
};
struct SpecOutOfBounds : Error {
  using Error::Error;
};

}  // namespace divetrack
