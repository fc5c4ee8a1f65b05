#pragma once

#include <stdexcept>
#include <string>

namespace peergroups {

// Malformed or unusable input data (exit code 2 at the CLI boundary).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters, missing files, bad flags (exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative solver failed to reach its tolerance (exit code 3).
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace peergroups
