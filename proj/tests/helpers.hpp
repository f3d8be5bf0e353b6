#pragma once

// Generators and independent oracles for the test suites. Oracles avoid the
// library's SVD-based subspace code: projectors come from normal equations,
// kernels from full-pivot LU.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ppp/linalg.hpp"

namespace testing_support {

using ppp::Index;
using ppp::Matrix;
using ppp::Vector;
using Rng = std::mt19937_64;

inline constexpr double pi = std::numbers::pi;

inline Matrix gauss(Rng& rng, Index rows, Index cols) {
  std::normal_distribution<double> nd;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = nd(rng);
  return m;
}

inline Vector gauss_vec(Rng& rng, Index n) { return gauss(rng, n, 1).col(0); }

inline Index uniform_index(Rng& rng, Index lo, Index hi) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

/// Orthonormal basis of `rank` Gaussian directions, by Householder QR.
inline Matrix random_orthonormal(Rng& rng, Index dim, Index rank) {
  if (rank == 0) return Matrix(dim, 0);
  Eigen::HouseholderQR<Matrix> qr(gauss(rng, dim, rank));
  return qr.householderQ() * Matrix::Identity(dim, rank);
}

inline ppp::Subspace<double> random_sub(Rng& rng, Index dim, Index rank) {
  return ppp::Subspace<double>::from_orthonormal(random_orthonormal(rng, dim, rank));
}

inline ppp::Subspace<double> random_sub(Rng& rng, Index dim) { return random_sub(rng, dim, uniform_index(rng, 0, dim)); }

/// Projector onto the span of full-column-rank `a`: A (A^T A)^{-1} A^T.
inline Matrix projector_of(const Matrix& a) {
  if (a.cols() == 0) return Matrix::Zero(a.rows(), a.rows());
  const Matrix gram = a.transpose() * a;
  return a * gram.ldlt().solve(a.transpose());
}

/// Kernel basis (not orthonormal) by full-pivot LU; pivots below threshold * max(1, max|a_ij|) count as zero.
inline Matrix lu_kernel(const Matrix& a, double threshold = 1e-9) {
  if (a.cols() == 0) return Matrix(0, 0);
  const double peak = a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
  if (peak <= threshold) return Matrix::Identity(a.cols(), a.cols());
  Eigen::FullPivLU<Matrix> lu(a);
  lu.setThreshold(threshold * std::max(1.0, peak) / peak);
  if (lu.rank() == a.cols()) return Matrix(a.cols(), 0);
  return lu.kernel();
}

/// Column span basis (not orthonormal) by full-pivot LU.
inline Matrix lu_image(const Matrix& a, double threshold = 1e-9) {
  const double peak = a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
  if (peak <= threshold) return Matrix(a.rows(), 0);
  Eigen::FullPivLU<Matrix> lu(a);
  lu.setThreshold(threshold * std::max(1.0, peak) / peak);
  if (lu.rank() == 0) return Matrix(a.rows(), 0);
  return lu.image(a);
}

/// Operator-norm distance between the projectors onto two spans.
inline double span_distance(const Matrix& a, const Matrix& b) {
  const Matrix d = projector_of(lu_image(a)) - projector_of(lu_image(b));
  if (d.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(d).singularValues()(0);
}

inline double span_distance(const ppp::Subspace<double>& s, const Matrix& b) { return span_distance(s.basis(), b); }

/// Fixed points of a linear map, as a kernel basis of T - I.
inline Matrix fix_oracle(const Matrix& t, double threshold = 1e-9) {
  return lu_kernel(t - Matrix::Identity(t.rows(), t.cols()), threshold);
}

inline Matrix vcat(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() + b.rows(), a.cols());
  out << a, b;
  return out;
}

inline Vector vcat(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

/// Square root of a symmetric PSD matrix as U Σ^{1/2} U^T from a Jacobi SVD.
inline Matrix svd_sqrt_psd(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.singularValues().cwiseSqrt().asDiagonal() * svd.matrixU().transpose();
}

}  // namespace testing_support
