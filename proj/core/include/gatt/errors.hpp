#pragma once

#include <stdexcept>
#include <string>

namespace gatt {

// Bad inputs: malformed files, out-of-range indices, mismatched shapes.
// The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Numeric failures: non-finite values, degenerate softmax support.
// The CLI maps this to exit code 2.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gatt
