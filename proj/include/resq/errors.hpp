#pragma once

#include <stdexcept>
#include <string>

namespace resq {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Operand spaces or matrix shapes disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

// Integration drifted beyond tolerance; retry with a smaller time step.
class StepSizeError : public Error {
 public:
  using Error::Error;
};

class FrequencyError : public Error {
 public:
  using Error::Error;
};

// The dispersive formulas are singular when a qubit is resonant with a mode.
class ResonanceError : public Error {
 public:
  using Error::Error;
};

class SelectivityError : public Error {
 public:
  using Error::Error;
};

// Gate simulation produced a result too far from a gate to be meaningful.
class GateDiagnosticError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class BackendError : public Error {
 public:
  using Error::Error;
};

class LatticeError : public Error {
 public:
  using Error::Error;
};

// Malformed device or pattern document.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace resq
