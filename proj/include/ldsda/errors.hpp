#pragma once

#include <stdexcept>
#include <string>

namespace ldsda {

// Base for all errors thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Arithmetic on a point outside a function's domain (ln of <= 0, x/0).
struct DomainError : Error {
  using Error::Error;
};

// An expression referenced a variable index outside the supplied point.
struct UnboundVariable : Error {
  using Error::Error;
};

struct DuplicateName : Error {
  using Error::Error;
};

struct UndeclaredVariable : Error {
  using Error::Error;
};

// Disjunction with fewer than two disjuncts.
struct ArityTooSmall : Error {
  using Error::Error;
};

// Requirement 2 violated: no Exactly(1, .) proposition over the declared list.
struct MissingExactlyOne : Error {
  using Error::Error;
};

struct DuplicateBoolean : Error {
  using Error::Error;
};

// Lattice point component outside [1, |list|].
struct OutOfBounds : Error {
  using Error::Error;
};

// Logic propagation left Booleans undecided; the reduced problem is not an NLP.
struct UnresolvedBooleans : Error {
  using Error::Error;
};

struct IncompleteAssignment : Error {
  using Error::Error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct InvalidParams : Error {
  using Error::Error;
};

// The initial lattice point has no feasible subproblem.
struct InfeasibleStart : Error {
  using Error::Error;
};

struct ModelFrozen : Error {
  using Error::Error;
};

}  // namespace ldsda
