#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dcgpsr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree, or a dimension is zero.
class InvalidDimension : public Error {
 public:
  using Error::Error;
};

/// A value is outside the operation's domain (empty list, negative sigma, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A solver produced a non-finite value or hit a singular system.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, std::size_t iteration)
      : Error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

/// Exhaustive search refused because the candidate count exceeds its guard.
class InstanceTooLarge : public Error {
 public:
  using Error::Error;
};

/// A file could not be opened, read or parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline std::string dims(std::ptrdiff_t a, std::ptrdiff_t b) {
  return std::to_string(a) + " vs " + std::to_string(b);
}

inline void require_same_size(std::ptrdiff_t a, std::ptrdiff_t b,
                              const char* what) {
  if (a != b) throw InvalidDimension(std::string(what) + ": " + dims(a, b));
}

}  // namespace detail
}  // namespace dcgpsr
