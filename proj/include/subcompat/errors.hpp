#pragma once

#include <stdexcept>
#include <string>

namespace subcompat {

// Malformed or out-of-contract input.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested size exceeds a configured cap.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative numerical routine failed to meet its contract.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace subcompat
