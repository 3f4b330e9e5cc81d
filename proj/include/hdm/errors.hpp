#pragma once

#include <stdexcept>
#include <string>

namespace hdm {

// Error categories map one-to-one onto CLI exit codes (see tools/commands.cpp).

class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// sigma == 0 fed to a formula whose prefactor diverges there.
class SingularLimitError : public InputError {
 public:
  explicit SingularLimitError(const std::string& what)
      : InputError(what + " (use the sigma = 0 closed form instead)") {}
};

class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hdm
