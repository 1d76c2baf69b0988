#pragma once

#include <stdexcept>
#include <string>

namespace weightlab {

enum class ErrorKind {
  InvalidIndex,
  NoSibling,
  ResourceLimit,
  Dependency,
  Singularity,
  TooClose,
  NumericalFailure,
  Fit,
  Config,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised by cauchy_sum when the evaluation point sits on an atom.
class SingularityError : public Error {
 public:
  SingularityError(std::size_t atom, double position)
      : Error(ErrorKind::Singularity,
              "evaluation point coincides with atom #" + std::to_string(atom) +
                  " at " + std::to_string(position)),
        atom_(atom),
        position_(position) {}

  std::size_t atom() const noexcept { return atom_; }
  double position() const noexcept { return position_; }

 private:
  std::size_t atom_;
  double position_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace weightlab
