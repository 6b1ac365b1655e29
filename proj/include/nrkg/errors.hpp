#pragma once

#include <stdexcept>
#include <string>

namespace nrkg {

/// Invalid user-facing configuration (grid sizes, step sizes, data parameters).
/// The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an API precondition (mismatched grids, wrong formulation).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A run completed but failed a numerical validity gate (energy drift).
/// The CLI maps this to exit code 3.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  IoError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

namespace detail {

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ContractViolation(msg);
}

}  // namespace detail
}  // namespace nrkg
