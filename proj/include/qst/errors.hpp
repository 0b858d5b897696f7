#pragma once

#include <stdexcept>

namespace qst {

// Iterative procedure (likelihood maximization, calibration bisection)
// failed to reach its target accuracy. Mapped to a dedicated process exit
// code by the command-line tool.
class NonConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qst
