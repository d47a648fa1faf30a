#pragma once

#include <stdexcept>
#include <string>

namespace sabre {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed file contents (bad magic, truncated chunk, corrupt CSV row).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Recognized container but unsupported encoding (e.g. non-PCM WAV).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Input too small/degenerate for the requested operation.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration values or combinations.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Shape/contract mismatch between caller and callee.
class InterfaceError : public Error {
 public:
  using Error::Error;
};

// Gradient identically zero where a direction is required.
class ZeroGradientError : public Error {
 public:
  using Error::Error;
};

// Attack cannot make progress (e.g. saliency map identically zero).
class StalledAttackError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sabre
