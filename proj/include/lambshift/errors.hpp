#pragma once

#include <stdexcept>

namespace lambshift {

// bad user input: device/drive/config validation problems (CLI exit 1)
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// numerical failures: non-convergence, broken preconditions of a solver
// stage, formula domain violations (CLI exit 2)
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace lambshift
