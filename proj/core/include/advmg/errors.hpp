#pragma once

#include <stdexcept>
#include <string>

namespace advmg {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// A circulant solve hit an eigenvalue with magnitude <= 1e-13.
class SingularOperator : public Error {
 public:
  using Error::Error;
};

class GridTooSmall : public Error {
 public:
  using Error::Error;
};

// Some stepper eigenvalue has magnitude above 1 + 1e-10.
class UnstableScheme : public Error {
 public:
  using Error::Error;
};

class EmptyPattern : public Error {
 public:
  using Error::Error;
};

class InvalidPattern : public Error {
 public:
  using Error::Error;
};

class IllConditioned : public Error {
 public:
  IllConditioned(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

// An inverse transform left an imaginary part larger than 1e-8.
class ImaginaryResidue : public Error {
 public:
  ImaginaryResidue(const std::string& what, double residue)
      : Error(what), residue_(residue) {}
  double residue() const noexcept { return residue_; }

 private:
  double residue_;
};

class NonFiniteObjective : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class MissingBaseline : public Error {
 public:
  using Error::Error;
};

}  // namespace advmg
