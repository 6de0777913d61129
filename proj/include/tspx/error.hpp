#pragma once

#include <stdexcept>
#include <string>

namespace tspx {

// Errors caused by bad user input (malformed files, invalid parameters).
// The CLI maps these to exit code 2.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Errors that indicate a broken internal invariant. The CLI maps these to
// exit code 3.
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace tspx
