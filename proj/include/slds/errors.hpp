#pragma once

#include <stdexcept>
#include <string>

namespace slds {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A caller-visible contract violation: malformed file, inconsistent shapes,
// an argument outside its documented domain.
struct InputError : Error {
  using Error::Error;
};

// A factorization or solve that still failed after the jitter retry.
struct NumericalError : Error {
  using Error::Error;
};

}  // namespace slds
