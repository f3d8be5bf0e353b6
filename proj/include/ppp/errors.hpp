#pragma once

#include <stdexcept>
#include <string>

namespace ppp {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: non-finite entries, asymmetric matrix where symmetry is required.
class InvalidInput : public Error {
public:
  using Error::Error;
};

class DimensionMismatch : public InvalidInput {
public:
  using InvalidInput::InvalidInput;
};

/// A matrix required to be positive semidefinite has an eigenvalue below the clamp window.
class NotPositiveSemidefinite : public InvalidInput {
public:
  using InvalidInput::InvalidInput;
};

/// Parameters violate a method invariant (e.g. sigma*tau*|L|^2 > 1, n < 3).
class InvalidConfig : public Error {
public:
  using Error::Error;
};

/// An iterative numerical kernel failed (Schur sweeps exhausted, factorization breakdown).
class NumericalFailure : public Error {
public:
  using Error::Error;
};

/// An affine constraint set is empty. Carries the least-squares residual.
class Infeasible : public Error {
public:
  Infeasible(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

namespace detail {

inline void require_dims(bool ok, const char* where) {
  if (!ok) throw DimensionMismatch(std::string(where) + ": dimension mismatch");
}

}  // namespace detail

}  // namespace ppp
