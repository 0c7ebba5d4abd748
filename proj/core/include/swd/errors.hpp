#pragma once

#include <stdexcept>
#include <string>

namespace swd {

/// Invalid user input: malformed files, out-of-range parameters, violated
/// preconditions. The CLI maps this to exit code 2.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace swd
