#pragma once

#include <stdexcept>
#include <string>

namespace scenematch {

// Shape disagreement between operands (matmul inner dims, concat widths, ...).
struct DimensionError : std::invalid_argument {
  explicit DimensionError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Caller broke an API precondition (non-scalar loss, foreign tape node, ...).
struct ContractError : std::logic_error {
  explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

// Structured-text input could not be parsed.
struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Parsed data violates a documented invariant.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite value or undefined numeric operation (zero-norm cosine, ...).
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace scenematch
