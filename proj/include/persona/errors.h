#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace persona {

// Base for every error the engine raises deliberately.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input values: coefficients, config, empty populations, malformed requests.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Profile file could not be decoded. byte_offset is set for syntax errors.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::optional<std::size_t> byte_offset)
      : Error(byte_offset ? message + " (at byte " + std::to_string(*byte_offset) + ")"
                          : message),
        byte_offset_(byte_offset) {}

  std::optional<std::size_t> byte_offset() const { return byte_offset_; }

 private:
  std::optional<std::size_t> byte_offset_;
};

class UnsupportedVersionError : public Error {
 public:
  explicit UnsupportedVersionError(long long version)
      : Error("unsupported profile version " + std::to_string(version)), version_(version) {}

  long long version() const { return version_; }

 private:
  long long version_;
};

class ProviderError : public Error {
 public:
  ProviderError(const std::string& message, bool retryable)
      : Error(message), retryable_(retryable) {}

  bool retryable() const { return retryable_; }

 private:
  bool retryable_;
};

}  // namespace persona
