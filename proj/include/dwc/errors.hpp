#pragma once

#include <stdexcept>
#include <string>

namespace dwc {

// Error taxonomy shared by every module. All derive from std::runtime_error
// so callers that only care about "something failed" can catch one type.

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised by the trainer when a loss or parameter becomes non-finite.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dwc
