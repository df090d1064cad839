#pragma once

#include <stdexcept>
#include <string>

namespace radapt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition violated by the caller (bad shape, bad range, bad config).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Checkpoint file is truncated, fails its checksum, or does not match the
/// model it is being loaded into.
class CorruptCheckpoint : public Error {
 public:
  using Error::Error;
};

/// File missing, unreadable or not in the expected format.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Optimization produced a non-finite or runaway loss.
class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidInput(message);
}

}  // namespace detail
}  // namespace radapt
