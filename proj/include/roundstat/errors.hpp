#pragma once

#include <stdexcept>
#include <string>

namespace roundstat {

// Bad arguments: shapes, parameters, grid points outside a formula's domain.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A rounded result left the finite range of the target format.
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

// The requested quantity does not exist for these inputs (e.g. PB2 with
// unbounded support, a variance of a heavy-tailed factor).
class UnavailableError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class SingularError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace roundstat
