#pragma once

#include <stdexcept>
#include <string>

namespace qmf {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// A region or observable reaches past the stored depth of a truncated tree.
class TruncationError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A boundary vertex has more than one neighbour inside a connected region.
class NotATreeError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Fixed-point or eigen solver failed to produce an admissible solution.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// The amplitude field does not satisfy the hypothesis an operation needs.
class UnsupportedField : public Error {
 public:
  using Error::Error;
};

/// An internal consistency assertion on a computed value failed.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// A configuration document is malformed; the message names the offending field.
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace qmf
