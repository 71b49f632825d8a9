#pragma once

#include <stdexcept>
#include <string>

namespace gpsl {

/// Raised when a training run must stop (non-finite loss, gradient or
/// parameter). The message carries the offending parameter name or the
/// iteration index.
class AbortRunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gpsl
