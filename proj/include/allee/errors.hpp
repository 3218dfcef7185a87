#pragma once

#include <stdexcept>
#include <string>

namespace allee {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A parameter or argument outside the model's admissible domain.
class DomainError : public Error {
public:
  using Error::Error;
};

/// A numerical procedure could not produce a trustworthy answer.
/// The CLI maps every subclass to exit code 3.
class NumericalError : public Error {
public:
  using Error::Error;
};

class InvalidBracket : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class BracketError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class SolveError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// f'(x) vanishes, so quantities dividing by it are undefined.
class DegenerateDerivative : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class NonUnique : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class NotFound : public NumericalError {
public:
  using NumericalError::NumericalError;
};

}  // namespace allee
