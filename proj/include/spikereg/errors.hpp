#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace spikereg {

// Structural problems with a configuration value or an argument.
// The command line maps this to exit code 2.
class config_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A solver failed to reach its required tolerance.
class solver_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The spiking network exceeded its per-step firing budget. Carries the step
// index at which the overrun happened. The command line maps this to exit
// code 3.
class instability_error : public std::runtime_error {
 public:
  instability_error(const std::string& msg, std::int64_t step)
      : std::runtime_error(msg + " (step " + std::to_string(step) + ")"),
        step_(step) {}

  std::int64_t step() const noexcept { return step_; }

 private:
  std::int64_t step_;
};

}  // namespace spikereg
