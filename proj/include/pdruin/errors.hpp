#ifndef PDRUIN_ERRORS_HPP
#define PDRUIN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pdruin {

/// A numerical procedure failed to deliver a result at the requested
/// accuracy (non-convergence, blow-up, certificate failure).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration or input document is malformed.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pdruin

#endif  // PDRUIN_ERRORS_HPP
