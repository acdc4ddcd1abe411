#pragma once

#include <stdexcept>
#include <string>

namespace isletnet {

// Invalid parameters, preconditions or configuration files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable, malformed or inconsistent input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A result that breaks one of the library's own guarantees.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace isletnet
