#pragma once

#include <stdexcept>
#include <string>

namespace adsmax {

// invalid input or violated precondition (CLI exit code 2)
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// solver did not reach tolerance (CLI exit code 3)
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// invariant audit failed (CLI exit code 4)
struct AuditError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace adsmax
