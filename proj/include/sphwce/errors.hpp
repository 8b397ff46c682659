#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sphwce {

// Raised when a numerical procedure cannot certify its own result
// (non-converged eigen-solve, unresolved quadrature, unsound tail bound).
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PointFileError : public std::runtime_error {
 public:
  enum class Kind { Parse, Norm, WeightSum };

  PointFileError(Kind kind, std::size_t line, const std::string& what)
      : std::runtime_error(what), kind_(kind), line_(line) {}

  Kind kind() const noexcept { return kind_; }
  // 1-based line number; 0 when the error is not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

}  // namespace sphwce
