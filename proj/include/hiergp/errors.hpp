#pragma once

#include <stdexcept>
#include <string>

namespace hiergp {

// Bad distribution parameters, malformed configs, dimension mismatches.
class invalid_parameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Factorization failures and other runtime numerical breakdowns.
// The message carries whatever conditioning diagnostic is available.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class dimension_mismatch : public invalid_parameter {
 public:
  using invalid_parameter::invalid_parameter;
};

}  // namespace hiergp
