#pragma once

// Dense small-matrix numerics and subspace algebra.
//
// Subspaces are held as orthonormal bases and projectors are formed on
// demand. All rank decisions go through one thresholded SVD; the default
// threshold is 1e-10 relative to the leading singular value.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <utility>

#include "ppp/errors.hpp"

namespace ppp {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;

/// Default numerical thresholds, widened for low-precision scalars.
template <typename Scalar>
struct Tolerances {
  static Scalar eps() { return std::numeric_limits<Scalar>::epsilon(); }
  /// Relative singular-value cutoff for numerical rank.
  static Scalar rank() { return std::max(Scalar(1e-10), Scalar(100) * eps()); }
  /// Entrywise bound on basis^T basis - I.
  static Scalar orthonormality() { return std::max(Scalar(1e-12), Scalar(1000) * eps()); }
  /// Symmetry bound and negative-eigenvalue clamp window (relative to max(1, |A|)).
  static Scalar symmetry() { return std::max(Scalar(1e-10), Scalar(100) * eps()); }
  static Scalar psd_clamp() { return std::max(Scalar(1e-10), Scalar(100) * eps()); }
};

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* where) {
  if (!m.allFinite()) throw InvalidInput(std::string(where) + ": non-finite entry");
}

/// Thin SVD; BDC for anything beyond toy sizes.
template <typename Scalar>
struct ThinSvd {
  MatrixX<Scalar> U;
  VectorX<Scalar> S;
  MatrixX<Scalar> V;
};

template <typename Scalar>
ThinSvd<Scalar> thin_svd(const MatrixX<Scalar>& a, bool want_u, bool want_v, bool full_v = false) {
  unsigned opts = 0;
  if (want_u) opts |= Eigen::ComputeThinU;
  if (want_v) opts |= full_v ? Eigen::ComputeFullV : Eigen::ComputeThinV;
  ThinSvd<Scalar> out;
  if (std::min(a.rows(), a.cols()) > 64) {
    Eigen::BDCSVD<MatrixX<Scalar>> svd(a, opts);
    out.S = svd.singularValues();
    if (want_u) out.U = svd.matrixU();
    if (want_v) out.V = svd.matrixV();
  } else {
    Eigen::JacobiSVD<MatrixX<Scalar>> svd(a, opts);
    out.S = svd.singularValues();
    if (want_u) out.U = svd.matrixU();
    if (want_v) out.V = svd.matrixV();
  }
  return out;
}

template <typename Scalar>
Index count_above(const VectorX<Scalar>& s, Scalar threshold) {
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > threshold) ++r;
  return r;
}

}  // namespace detail

/// A linear subspace of R^d stored as a d x r matrix with orthonormal columns.
/// r = 0 represents the trivial subspace {0}.
template <typename Scalar = double>
class Subspace {
public:
  using scalar_type = Scalar;
  using MatrixType = MatrixX<Scalar>;
  using VectorType = VectorX<Scalar>;

  /// The trivial subspace of R^0.
  Subspace() = default;

  /// Wraps a basis that is already orthonormal; throws if it is not.
  static Subspace from_orthonormal(MatrixType basis) {
    detail::require_finite(basis, "Subspace::from_orthonormal");
    if (basis.cols() > basis.rows())
      throw InvalidInput("Subspace::from_orthonormal: more columns than ambient dimension");
    if (basis.cols() > 0) {
      const MatrixType gram = basis.transpose() * basis;
      const Scalar err =
          (gram - MatrixType::Identity(basis.cols(), basis.cols())).cwiseAbs().maxCoeff();
      if (err > Tolerances<Scalar>::orthonormality())
        throw InvalidInput("Subspace::from_orthonormal: columns are not orthonormal");
    }
    return Subspace(std::move(basis));
  }

  static Subspace trivial(Index ambient_dim) {
    if (ambient_dim < 0) throw InvalidInput("Subspace::trivial: negative dimension");
    return Subspace(MatrixType(ambient_dim, 0));
  }

  static Subspace full(Index ambient_dim) {
    if (ambient_dim < 0) throw InvalidInput("Subspace::full: negative dimension");
    return Subspace(MatrixType::Identity(ambient_dim, ambient_dim));
  }

  /// Coordinate subspace spanned by the listed unit vectors e_i.
  template <typename Range>
  static Subspace coordinate(Index ambient_dim, const Range& indices) {
    Index count = 0;
    for (auto i : indices) {
      (void)i;
      ++count;
    }
    MatrixType basis = MatrixType::Zero(ambient_dim, count);
    Index c = 0;
    for (auto i : indices) {
      if (i < 0 || i >= ambient_dim) throw InvalidInput("Subspace::coordinate: index out of range");
      basis(static_cast<Index>(i), c++) = Scalar(1);
    }
    return from_orthonormal(std::move(basis));
  }

  Index ambient_dim() const { return basis_.rows(); }
  Index rank() const { return basis_.cols(); }
  bool is_trivial() const { return rank() == 0; }
  bool is_full() const { return rank() == ambient_dim(); }
  const MatrixType& basis() const { return basis_; }

  MatrixType projector() const { return basis_ * basis_.transpose(); }

private:
  explicit Subspace(MatrixType basis) : basis_(std::move(basis)) {}

  MatrixType basis_;
};

/// Orthonormal basis of the column span. Singular values at or below
/// `tol * scale` are treated as zero; `scale` defaults to the largest one.
template <typename Derived>
Subspace<typename Derived::Scalar> orthonormal_basis(
    const Eigen::MatrixBase<Derived>& columns,
    typename Derived::Scalar tol = Tolerances<typename Derived::Scalar>::rank(),
    typename Derived::Scalar scale = typename Derived::Scalar(-1)) {
  using Scalar = typename Derived::Scalar;
  if (!(tol > Scalar(0))) throw InvalidInput("orthonormal_basis: tol must be positive");
  detail::require_finite(columns, "orthonormal_basis");
  const MatrixX<Scalar> a = columns;
  if (a.cols() == 0 || a.rows() == 0) return Subspace<Scalar>::trivial(a.rows());
  auto svd = detail::thin_svd<Scalar>(a, true, false);
  const Scalar smax = svd.S.size() > 0 ? svd.S(0) : Scalar(0);
  if (smax == Scalar(0)) return Subspace<Scalar>::trivial(a.rows());
  const Scalar ref = scale < Scalar(0) ? smax : scale;
  const Index r = detail::count_above<Scalar>(svd.S, tol * ref);
  return Subspace<Scalar>::from_orthonormal(svd.U.leftCols(r));
}

/// Kernel of `a` as a subspace of R^{a.cols()}; singular values at or below
/// `tol * scale` count as zero (scale defaults to the largest singular value).
template <typename Derived>
Subspace<typename Derived::Scalar> null_space(
    const Eigen::MatrixBase<Derived>& a_in,
    typename Derived::Scalar tol = Tolerances<typename Derived::Scalar>::rank(),
    typename Derived::Scalar scale = typename Derived::Scalar(-1)) {
  using Scalar = typename Derived::Scalar;
  detail::require_finite(a_in, "null_space");
  const MatrixX<Scalar> a = a_in;
  const Index n = a.cols();
  if (a.rows() == 0 || n == 0) return Subspace<Scalar>::full(n);
  auto svd = detail::thin_svd<Scalar>(a, false, true, /*full_v=*/true);
  const Scalar smax = svd.S.size() > 0 ? svd.S(0) : Scalar(0);
  const Scalar ref = scale < Scalar(0) ? smax : scale;
  if (ref == Scalar(0)) return Subspace<Scalar>::full(n);
  const Index r = detail::count_above<Scalar>(svd.S, tol * ref);
  return Subspace<Scalar>::from_orthonormal(svd.V.rightCols(n - r));
}

/// Orthogonal projection Q Q^T v (v may also be a matrix of column vectors).
template <typename Scalar, typename Derived>
MatrixX<Scalar> project_columns(const Subspace<Scalar>& s, const Eigen::MatrixBase<Derived>& v) {
  detail::require_dims(v.rows() == s.ambient_dim(), "project");
  return s.basis() * (s.basis().transpose() * v);
}

template <typename Scalar, typename Derived>
VectorX<Scalar> project(const Subspace<Scalar>& s, const Eigen::MatrixBase<Derived>& v) {
  static_assert(Derived::ColsAtCompileTime == 1 || Derived::ColsAtCompileTime == Eigen::Dynamic);
  detail::require_dims(v.rows() == s.ambient_dim() && v.cols() == 1, "project");
  return s.basis() * (s.basis().transpose() * v);
}

/// |v - P_S v|.
template <typename Scalar, typename Derived>
Scalar membership_residual(const Subspace<Scalar>& s, const Eigen::MatrixBase<Derived>& v) {
  return (v - project(s, v)).norm();
}

/// Largest distance from a unit basis vector of `a` to `b`; 0 iff a is inside b.
template <typename Scalar>
Scalar containment_residual(const Subspace<Scalar>& a, const Subspace<Scalar>& b) {
  detail::require_dims(a.ambient_dim() == b.ambient_dim(), "containment_residual");
  if (a.rank() == 0) return Scalar(0);
  const MatrixX<Scalar> r = a.basis() - project_columns(b, a.basis());
  return r.colwise().norm().maxCoeff();
}

/// Mutual containment residual; 0 iff the subspaces coincide.
template <typename Scalar>
Scalar subspace_distance(const Subspace<Scalar>& a, const Subspace<Scalar>& b) {
  return std::max(containment_residual(a, b), containment_residual(b, a));
}

template <typename Scalar>
Subspace<Scalar> complement(const Subspace<Scalar>& s) {
  const Index d = s.ambient_dim();
  if (s.rank() == 0) return Subspace<Scalar>::full(d);
  if (s.rank() == d) return Subspace<Scalar>::trivial(d);
  Eigen::HouseholderQR<MatrixX<Scalar>> qr(s.basis());
  MatrixX<Scalar> q = qr.householderQ();
  return Subspace<Scalar>::from_orthonormal(q.rightCols(d - s.rank()));
}

template <typename Scalar>
Subspace<Scalar> sum(const Subspace<Scalar>& a, const Subspace<Scalar>& b,
                     Scalar tol = Tolerances<Scalar>::rank()) {
  detail::require_dims(a.ambient_dim() == b.ambient_dim(), "sum");
  MatrixX<Scalar> cols(a.ambient_dim(), a.rank() + b.rank());
  cols << a.basis(), b.basis();
  return orthonormal_basis(cols, tol);
}

/// a ∩ b = (a^⊥ + b^⊥)^⊥.
template <typename Scalar>
Subspace<Scalar> intersect(const Subspace<Scalar>& a, const Subspace<Scalar>& b,
                           Scalar tol = Tolerances<Scalar>::rank()) {
  detail::require_dims(a.ambient_dim() == b.ambient_dim(), "intersect");
  return complement(sum(complement(a), complement(b), tol));
}

/// Cartesian product a x b inside R^{d1+d2}.
template <typename Scalar>
Subspace<Scalar> product(const Subspace<Scalar>& a, const Subspace<Scalar>& b) {
  MatrixX<Scalar> basis = MatrixX<Scalar>::Zero(a.ambient_dim() + b.ambient_dim(), a.rank() + b.rank());
  basis.topLeftCorner(a.ambient_dim(), a.rank()) = a.basis();
  basis.bottomRightCorner(b.ambient_dim(), b.rank()) = b.basis();
  return Subspace<Scalar>::from_orthonormal(std::move(basis));
}

template <typename Scalar>
Scalar operator_norm(const MatrixX<Scalar>& a) {
  detail::require_finite(a, "operator_norm");
  if (a.size() == 0) return Scalar(0);
  auto svd = detail::thin_svd<Scalar>(a, false, false);
  return svd.S(0);
}

/// {x : L x ∈ V}, the kernel of P_{V^⊥} L; rank decisions relative to |L|.
template <typename Scalar>
Subspace<Scalar> preimage(const MatrixX<Scalar>& l, const Subspace<Scalar>& v,
                          Scalar tol = Tolerances<Scalar>::rank()) {
  detail::require_dims(l.rows() == v.ambient_dim(), "preimage");
  detail::require_finite(l, "preimage");
  const Scalar lnorm = operator_norm(l);
  if (lnorm == Scalar(0)) return Subspace<Scalar>::full(l.cols());
  const MatrixX<Scalar> k = l - project_columns(v, l);
  return null_space(k, tol, lnorm);
}

/// L(S); rank decisions relative to |L|.
template <typename Scalar>
Subspace<Scalar> image(const MatrixX<Scalar>& l, const Subspace<Scalar>& s,
                       Scalar tol = Tolerances<Scalar>::rank()) {
  detail::require_dims(l.cols() == s.ambient_dim(), "image");
  const Scalar lnorm = operator_norm(l);
  if (lnorm == Scalar(0) || s.rank() == 0) return Subspace<Scalar>::trivial(l.rows());
  return orthonormal_basis(MatrixX<Scalar>(l * s.basis()), tol, lnorm);
}

namespace detail {

template <typename Scalar>
Scalar symmetric_scale(const MatrixX<Scalar>& a) {
  return std::max(Scalar(1), a.size() ? a.cwiseAbs().maxCoeff() : Scalar(0));
}

template <typename Scalar>
void require_symmetric(const MatrixX<Scalar>& a, const char* where) {
  if (a.rows() != a.cols()) throw DimensionMismatch(std::string(where) + ": matrix not square");
  require_finite(a, where);
  if (a.size() == 0) return;
  const Scalar asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > Tolerances<Scalar>::symmetry() * symmetric_scale(a))
    throw InvalidInput(std::string(where) + ": matrix is not symmetric");
}

}  // namespace detail

/// f(A) for symmetric A via the eigendecomposition A = V diag(λ) V^T.
/// `f` receives each eigenvalue and must return a finite value.
template <typename Scalar, typename Fn>
MatrixX<Scalar> symmetric_function(const MatrixX<Scalar>& a, Fn&& f) {
  detail::require_symmetric(a, "symmetric_function");
  if (a.size() == 0) return a;
  const MatrixX<Scalar> sym = (a + a.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(sym);
  if (es.info() != Eigen::Success) throw NumericalFailure("symmetric_function: eigensolver failed");
  VectorX<Scalar> fl(es.eigenvalues().size());
  for (Index i = 0; i < fl.size(); ++i) fl(i) = f(es.eigenvalues()(i));
  const MatrixX<Scalar>& v = es.eigenvectors();
  MatrixX<Scalar> out = v * fl.asDiagonal() * v.transpose();
  return (out + out.transpose()) / Scalar(2);
}

/// Principal (symmetric PSD) square root. Eigenvalues in the clamp window
/// [-1e-10 max(1,|A|), 0] are set to zero; anything lower is rejected.
/// Eigenvalues at or below the eigensolver's roundoff floor n eps max(1,|A|)
/// are also set to zero, so a singular A does not pick up sqrt(eps) noise.
template <typename Scalar>
MatrixX<Scalar> principal_sqrt(const MatrixX<Scalar>& a) {
  detail::require_symmetric(a, "principal_sqrt");
  const Scalar scale = detail::symmetric_scale(a);
  const Scalar window = Tolerances<Scalar>::psd_clamp() * scale;
  const Scalar floor = Scalar(a.rows()) * Tolerances<Scalar>::eps() * scale;
  return symmetric_function(a, [window, floor](Scalar lambda) {
    if (lambda < -window)
      throw NotPositiveSemidefinite("principal_sqrt: eigenvalue " + std::to_string(double(lambda)) +
                                    " below clamp window");
    return lambda <= floor ? Scalar(0) : std::sqrt(lambda);
  });
}

/// Largest eigenvalue modulus, from the real Schur form (Francis double-shift QR).
template <typename Scalar>
Scalar spectral_radius(const MatrixX<Scalar>& a, Index max_sweeps_per_eigenvalue = 40) {
  if (a.rows() != a.cols()) throw DimensionMismatch("spectral_radius: matrix not square");
  detail::require_finite(a, "spectral_radius");
  if (a.size() == 0) return Scalar(0);
  Eigen::EigenSolver<MatrixX<Scalar>> es;
  es.setMaxIterations(max_sweeps_per_eigenvalue);
  es.compute(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw NumericalFailure("spectral_radius: Schur iteration did not converge");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Moore-Penrose inverse; singular values <= tol * largest are dropped.
template <typename Scalar>
MatrixX<Scalar> pseudo_inverse(const MatrixX<Scalar>& a, Scalar tol = Tolerances<Scalar>::rank()) {
  detail::require_finite(a, "pseudo_inverse");
  if (a.size() == 0) return MatrixX<Scalar>::Zero(a.cols(), a.rows());
  auto svd = detail::thin_svd<Scalar>(a, true, true);
  const Scalar cutoff = tol * svd.S(0);
  VectorX<Scalar> inv = VectorX<Scalar>::Zero(svd.S.size());
  for (Index i = 0; i < inv.size(); ++i)
    if (svd.S(i) > cutoff) inv(i) = Scalar(1) / svd.S(i);
  return svd.V * inv.asDiagonal() * svd.U.transpose();
}

/// Lower-triangular G with G G^T = A for symmetric PSD A.
///
/// Semidefinite input is handled by zeroing the column of any pivot that
/// vanishes to working precision, so G keeps its triangular shape and its
/// nonzero columns count the numerical rank.
template <typename Scalar>
MatrixX<Scalar> cholesky(const MatrixX<Scalar>& a) {
  detail::require_symmetric(a, "cholesky");
  const Index n = a.rows();
  const Scalar scale = std::max(Scalar(1), n ? a.diagonal().cwiseAbs().maxCoeff() : Scalar(0));
  const Scalar zero_pivot = Scalar(64) * Scalar(std::max<Index>(n, 1)) * Tolerances<Scalar>::eps() * scale;
  const Scalar negative_window = Tolerances<Scalar>::psd_clamp() * scale;
  // Off-diagonal Schur entries this large next to a vanished pivot mean the matrix is indefinite.
  const Scalar coupling_limit = std::sqrt(Tolerances<Scalar>::psd_clamp()) * scale;

  MatrixX<Scalar> g = MatrixX<Scalar>::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    const Scalar d = a(j, j) - g.row(j).head(j).squaredNorm();
    if (d < -negative_window)
      throw NotPositiveSemidefinite("cholesky: negative pivot " + std::to_string(double(d)));
    if (d <= zero_pivot) {
      for (Index i = j + 1; i < n; ++i) {
        const Scalar s = a(i, j) - g.row(i).head(j).dot(g.row(j).head(j));
        if (std::abs(s) > coupling_limit)
          throw NotPositiveSemidefinite("cholesky: zero pivot with nonzero coupling");
      }
      continue;
    }
    const Scalar gjj = std::sqrt(d);
    g(j, j) = gjj;
    for (Index i = j + 1; i < n; ++i)
      g(i, j) = (a(i, j) - g.row(i).head(j).dot(g.row(j).head(j))) / gjj;
  }
  return g;
}

/// Horizontal concatenation [a b].
template <typename Scalar>
MatrixX<Scalar> hstack(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b) {
  detail::require_dims(a.rows() == b.rows(), "hstack");
  MatrixX<Scalar> out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

/// Vertical concatenation [a; b].
template <typename Scalar>
MatrixX<Scalar> vstack(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b) {
  detail::require_dims(a.cols() == b.cols(), "vstack");
  MatrixX<Scalar> out(a.rows() + b.rows(), a.cols());
  out << a, b;
  return out;
}

}  // namespace ppp
