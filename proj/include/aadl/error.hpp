#pragma once

#include <stdexcept>
#include <string>

namespace aadl {

enum class ErrorKind {
  DimensionMismatch,
  InvalidArgument,
  NumericalFailure,
  Io,
  Parse,
};

// Single exception type for the library; `kind()` lets the CLI map failures
// onto exit codes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

}  // namespace aadl
