#pragma once

#include <stdexcept>

namespace ldm {

/// A computation produced non-finite values, diverged, or hit a numerical
/// tolerance it could not meet. Input validation uses std::invalid_argument.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace ldm
