#pragma once

#include <stdexcept>
#include <string>

namespace qlga {

/// Base of every error raised by the library. The CLI maps the concrete
/// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad parameters, invalid slots, unsupported model/sector
/// combinations, schema violations.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// D >= 2 with more than one particle.
class UnsupportedSector : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// A requested basis or matrix exceeds a configured size cap.
class CapacityError : public Error {
 public:
  CapacityError(const std::string& what, unsigned long long required,
                unsigned long long cap)
      : Error(what + ": required size " + std::to_string(required) +
              " exceeds cap " + std::to_string(cap)),
        required_(required),
        cap_(cap) {}

  unsigned long long required() const noexcept { return required_; }
  unsigned long long cap() const noexcept { return cap_; }

 private:
  unsigned long long required_;
  unsigned long long cap_;
};

/// A numerical certificate failed (unitarity, eigen residual, branch choice).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace qlga
