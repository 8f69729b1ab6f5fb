#pragma once

#include <stdexcept>

namespace scalesim {

// Invalid or inconsistent configuration (bad parameter ranges, unknown names).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A forecaster could not be fit, e.g. the series is shorter than the method minimum.
struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An operation was invoked in a state that forbids it, e.g. forecast() before fit().
struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace scalesim
