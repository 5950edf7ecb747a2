#pragma once

#include <stdexcept>
#include <string>

namespace oblsamp {

// Bad parameters or inconsistent run configuration (CLI exit code 3).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Authenticated decryption failed: wrong key or tampered blob.
class IntegrityError : public std::runtime_error {
 public:
  explicit IntegrityError(const std::string& what) : std::runtime_error(what) {}
};

// An algorithm tried to hold more element slots than its declared budget.
class CapacityError : public std::logic_error {
 public:
  explicit CapacityError(const std::string& what) : std::logic_error(what) {}
};

// Out-of-bounds slot index or read of a never-written slot.
class MemoryError : public std::logic_error {
 public:
  explicit MemoryError(const std::string& what) : std::logic_error(what) {}
};

// Shuffle exceeded its retry budget.
class RetryLimitError : public std::runtime_error {
 public:
  explicit RetryLimitError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace oblsamp
