#pragma once

// Seeded Gaussian draws for configs, self-checks and tests.

#include <cstdint>
#include <random>

#include "ppp/linalg.hpp"

namespace ppp {

using Rng = std::mt19937_64;

template <typename Scalar = double>
MatrixX<Scalar> gaussian_matrix(Rng& rng, Index rows, Index cols) {
  std::normal_distribution<double> nd;
  MatrixX<Scalar> m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = Scalar(nd(rng));
  return m;
}

template <typename Scalar = double>
VectorX<Scalar> gaussian_vector(Rng& rng, Index n) {
  return gaussian_matrix<Scalar>(rng, n, 1).col(0);
}

/// Span of `rank` Gaussian vectors in R^dim (almost surely of that rank).
template <typename Scalar = double>
Subspace<Scalar> random_subspace(Rng& rng, Index dim, Index rank) {
  if (rank < 0 || rank > dim) throw InvalidInput("random_subspace: rank outside [0, dim]");
  if (rank == 0) return Subspace<Scalar>::trivial(dim);
  return orthonormal_basis(gaussian_matrix<Scalar>(rng, dim, rank));
}

/// Gaussian matrix rescaled to operator norm `norm`.
template <typename Scalar = double>
MatrixX<Scalar> random_matrix_with_norm(Rng& rng, Index rows, Index cols, Scalar norm) {
  MatrixX<Scalar> l = gaussian_matrix<Scalar>(rng, rows, cols);
  const Scalar n = operator_norm(l);
  if (n > Scalar(0)) l *= norm / n;
  return l;
}

}  // namespace ppp
