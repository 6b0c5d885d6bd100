#pragma once

#include <stdexcept>
#include <string>

namespace strm {

// Invalid or inconsistent configuration (bad law parameters, level/radius
// mismatch, unknown experiment name).  CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A run exceeded a configured population/memory cap.  The message names the
// cap so the caller can tell which limit fired.  CLI maps this to exit code 3.
class ResourceLimitError : public std::runtime_error {
 public:
  explicit ResourceLimitError(const std::string& what)
      : std::runtime_error(what) {}
};

// Operation requested in the wrong branching regime (e.g. extinction
// probability of a law with mean <= 1, where the answer is trivially 1).
class RegimeError : public std::runtime_error {
 public:
  explicit RegimeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace strm
