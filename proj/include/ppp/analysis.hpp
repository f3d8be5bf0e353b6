#pragma once

// Two-lines spectral formulas and factorizations M = C C^T of the
// primal-dual preconditioner.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ppp/linalg.hpp"

namespace ppp {

// ---------------------------------------------------------------------------
// Two lines in R^2: U = R(1,0), V = R(cos θ, sin θ), L = Id, σ = 1/τ.

/// The 4x4 iteration matrix T of the two-lines primal-dual instance.
template <typename Scalar = double>
MatrixX<Scalar> two_lines_T(Scalar theta, Scalar tau) {
  if (!(tau > Scalar(0))) throw InvalidInput("two_lines_T: tau must be positive");
  if (!std::isfinite(theta)) throw InvalidInput("two_lines_T: theta must be finite");
  const Scalar c = std::cos(theta), s = std::sin(theta);
  MatrixX<Scalar> t(4, 4);
  t << Scalar(1), Scalar(0), -Scalar(1) / tau, Scalar(0),
       Scalar(0), Scalar(0), Scalar(0), Scalar(0),
       tau * s * s, tau * c * s, -s * s, -c * s,
       -tau * c * s, -tau * c * c, c * s, c * c;
  return t;
}

/// Closed-form |T| of the two-lines matrix.
template <typename Scalar>
Scalar two_lines_norm(Scalar theta, Scalar tau) {
  const Scalar t2 = tau * tau, t4 = t2 * t2;
  const Scalar inner = std::sqrt(Scalar(1) + t4 - Scalar(2) * t2 * std::cos(Scalar(2) * theta));
  return std::sqrt(Scalar(1) + (Scalar(1) + t4 + (Scalar(1) + t2) * inner) / (Scalar(2) * t2));
}

template <typename Scalar = double>
struct TwoLinesReport {
  Scalar theta = 0;
  Scalar tau = 1;
  MatrixX<Scalar> T;
  Scalar rho_closed = 0, rho_numeric = 0;
  Scalar norm_closed = 0, norm_numeric = 0;
  Scalar lower = 0, upper = 0;
};

template <typename Scalar = double>
TwoLinesReport<Scalar> two_lines_report(Scalar theta, Scalar tau) {
  TwoLinesReport<Scalar> r;
  r.theta = theta;
  r.tau = tau;
  r.T = two_lines_T(theta, tau);
  r.rho_closed = std::abs(std::cos(theta));
  r.rho_numeric = spectral_radius(r.T);
  r.norm_closed = two_lines_norm(theta, tau);
  r.norm_numeric = operator_norm(r.T);
  r.lower = std::sqrt(Scalar(1) + std::max(tau * tau, Scalar(1) / (tau * tau)));
  r.upper = tau + Scalar(1) / tau;
  return r;
}

// ---------------------------------------------------------------------------
// Factorizations.

enum class FactorRoute { cholesky, sqrt_sym, sqrt_polar, scalar_2x2 };

inline const char* to_string(FactorRoute r) {
  switch (r) {
    case FactorRoute::cholesky: return "cholesky";
    case FactorRoute::sqrt_sym: return "sqrt_sym";
    case FactorRoute::sqrt_polar: return "sqrt_polar";
    case FactorRoute::scalar_2x2: return "scalar_2x2";
  }
  return "unknown";
}

template <typename Scalar = double>
struct FactorizationResult {
  MatrixX<Scalar> C;
  /// |C C^T - M| in the operator norm.
  Scalar reconstruction_error = 0;
  FactorRoute route = FactorRoute::cholesky;
};

/// M = [[I/σ, -L^T], [-L, I/τ]] for L : R^n -> R^m.
template <typename Scalar>
MatrixX<Scalar> cp_preconditioner(const MatrixX<Scalar>& l, Scalar sigma, Scalar tau) {
  if (!(sigma > Scalar(0) && tau > Scalar(0))) throw InvalidConfig("cp_preconditioner: sigma, tau must be positive");
  detail::require_finite(l, "cp_preconditioner");
  const Index m = l.rows(), n = l.cols();
  MatrixX<Scalar> out(n + m, n + m);
  out.topLeftCorner(n, n) = MatrixX<Scalar>::Identity(n, n) / sigma;
  out.topRightCorner(n, m) = -l.transpose();
  out.bottomLeftCorner(m, n) = -l;
  out.bottomRightCorner(m, m) = MatrixX<Scalar>::Identity(m, m) / tau;
  return out;
}

namespace detail {

template <typename Scalar>
Scalar reconstruction_error(const MatrixX<Scalar>& c, const MatrixX<Scalar>& m) {
  return operator_norm(MatrixX<Scalar>(c * c.transpose() - m));
}

/// Singular value decomposition L = P Σ Q^T with full P, Q, giving functions of
/// S = sqrt(L^T L), T = sqrt(L L^T) and the partial isometry U = L S^†.
template <typename Scalar>
struct Polar {
  MatrixX<Scalar> P, Q;
  VectorX<Scalar> s;
  Index rank = 0;

  explicit Polar(const MatrixX<Scalar>& l) {
    Eigen::JacobiSVD<MatrixX<Scalar>> svd(l, Eigen::ComputeFullU | Eigen::ComputeFullV);
    P = svd.matrixU();
    Q = svd.matrixV();
    s = svd.singularValues();
    const Scalar cutoff = s.size() ? Tolerances<Scalar>::rank() * s(0) : Scalar(0);
    rank = count_above<Scalar>(s, cutoff);
  }

  template <typename Fn>
  static MatrixX<Scalar> apply(const MatrixX<Scalar>& basis, const VectorX<Scalar>& s, Fn&& f) {
    const Index d = basis.rows();
    VectorX<Scalar> fd(d);
    for (Index i = 0; i < d; ++i) fd(i) = f(i < s.size() ? s(i) : Scalar(0));
    return basis * fd.asDiagonal() * basis.transpose();
  }

  /// f(S) on R^n.
  template <typename Fn>
  MatrixX<Scalar> fS(Fn&& f) const { return apply(Q, s, f); }
  /// f(T) on R^m.
  template <typename Fn>
  MatrixX<Scalar> fT(Fn&& f) const { return apply(P, s, f); }

  MatrixX<Scalar> U() const { return P.leftCols(rank) * Q.leftCols(rank).transpose(); }
};

}  // namespace detail

/// Canonical polar data of L: S = sqrt(L^T L), T = sqrt(L L^T), U = L S^†.
template <typename Scalar = double>
struct PolarParts {
  MatrixX<Scalar> S, T, U;
};

template <typename Scalar>
PolarParts<Scalar> polar_parts(const MatrixX<Scalar>& l) {
  detail::require_finite(l, "polar_parts");
  detail::Polar<Scalar> p(l);
  auto id = [](Scalar x) { return x; };
  return {p.fS(id), p.fT(id), p.U()};
}

/// C = [[I/sqrt(σ), 0], [-sqrt(σ) L, Z/sqrt(τ)]] with Z Z^T = I - στ L L^T.
/// Zero columns of the Cholesky factor Z are dropped, so dim_D may fall
/// below n + m when στ|L|^2 = 1.
template <typename Scalar>
FactorizationResult<Scalar> factor_cholesky(const MatrixX<Scalar>& l, Scalar sigma, Scalar tau) {
  if (!(sigma > Scalar(0) && tau > Scalar(0))) throw InvalidConfig("factor_cholesky: sigma, tau must be positive");
  detail::require_finite(l, "factor_cholesky");
  const Index m = l.rows(), n = l.cols();
  const Scalar lnorm = operator_norm(l);
  if (sigma * tau * lnorm * lnorm > Scalar(1) + Scalar(1e-12))
    throw InvalidConfig("factor_cholesky: sigma*tau*|L|^2 exceeds 1");
  MatrixX<Scalar> zz = MatrixX<Scalar>::Identity(m, m) - sigma * tau * (l * l.transpose());
  zz = (zz + zz.transpose()) / Scalar(2);
  const MatrixX<Scalar> z = cholesky(zz);
  std::vector<Index> keep;
  for (Index j = 0; j < m; ++j)
    if (z.col(j).squaredNorm() > Scalar(0)) keep.push_back(j);

  const Index k = static_cast<Index>(keep.size());
  MatrixX<Scalar> c = MatrixX<Scalar>::Zero(n + m, n + k);
  c.topLeftCorner(n, n) = MatrixX<Scalar>::Identity(n, n) / std::sqrt(sigma);
  c.bottomLeftCorner(m, n) = -std::sqrt(sigma) * l;
  for (Index j = 0; j < k; ++j) c.col(n + j).tail(m) = z.col(keep[std::size_t(j)]) / std::sqrt(tau);
  FactorizationResult<Scalar> r;
  r.reconstruction_error = detail::reconstruction_error(c, cp_preconditioner(l, sigma, tau));
  r.C = std::move(c);
  r.route = FactorRoute::cholesky;
  return r;
}

/// Principal square root of [[I, -L], [-L, I]] for symmetric PSD L with |L| <= 1:
/// ½[[√(I-L)+√(I+L), √(I-L)-√(I+L)], [√(I-L)-√(I+L), √(I-L)+√(I+L)]].
template <typename Scalar>
MatrixX<Scalar> sqrt_M_sym(const MatrixX<Scalar>& l) {
  detail::require_symmetric(l, "sqrt_M_sym");
  const Scalar window = Tolerances<Scalar>::psd_clamp();
  const Scalar floor = Scalar(2 * l.rows()) * Tolerances<Scalar>::eps();
  auto check = [&](Scalar x) {
    if (x < -window) throw InvalidInput("sqrt_M_sym: L is not positive semidefinite");
    if (x > Scalar(1) + window) throw InvalidInput("sqrt_M_sym: |L| exceeds 1");
    return x >= Scalar(1) - floor ? Scalar(1) : std::max(x, Scalar(0));
  };
  const MatrixX<Scalar> plus = symmetric_function(l, [&](Scalar x) {
    x = check(x);
    return (std::sqrt(Scalar(1) - x) + std::sqrt(Scalar(1) + x)) / Scalar(2);
  });
  const MatrixX<Scalar> minus = symmetric_function(l, [&](Scalar x) {
    x = check(x);
    return (std::sqrt(Scalar(1) - x) - std::sqrt(Scalar(1) + x)) / Scalar(2);
  });
  const Index n = l.rows();
  MatrixX<Scalar> out(2 * n, 2 * n);
  out << plus, minus, minus, plus;
  return out;
}

/// Principal square root of [[I/σ, -L^T], [-L, I/σ]] via the polar decomposition of L.
/// Requires σ|L| <= 1.
template <typename Scalar>
MatrixX<Scalar> sqrt_M_polar(const MatrixX<Scalar>& l, Scalar sigma = Scalar(1)) {
  if (!(sigma > Scalar(0))) throw InvalidConfig("sqrt_M_polar: sigma must be positive");
  detail::require_finite(l, "sqrt_M_polar");
  detail::Polar<Scalar> p(l);
  const Scalar smax = p.s.size() ? p.s(0) : Scalar(0);
  if (sigma * smax > Scalar(1) + Scalar(1e-12)) throw InvalidConfig("sqrt_M_polar: sigma*|L| exceeds 1");
  const Scalar scale = Scalar(1) / std::sqrt(sigma);
  // σs within roundoff of 1 is a zero eigenvalue of σM; snap it like principal_sqrt does.
  const Scalar floor = Scalar(l.rows() + l.cols()) * Tolerances<Scalar>::eps();
  auto clamp = [&](Scalar x) {
    x = sigma * x;
    return x >= Scalar(1) - floor ? Scalar(1) : x;
  };
  auto half_sum = [&](Scalar x) {
    x = clamp(x);
    return scale * (std::sqrt(Scalar(1) - x) + std::sqrt(Scalar(1) + x)) / Scalar(2);
  };
  auto half_diff = [&](Scalar x) {
    x = clamp(x);
    return scale * (std::sqrt(Scalar(1) - x) - std::sqrt(Scalar(1) + x)) / Scalar(2);
  };
  const MatrixX<Scalar> u = p.U();
  const Index m = l.rows(), n = l.cols();
  MatrixX<Scalar> out(n + m, n + m);
  out.topLeftCorner(n, n) = p.fS(half_sum);
  out.topRightCorner(n, m) = u.transpose() * p.fT(half_diff);
  out.bottomLeftCorner(m, n) = u * p.fS(half_diff);
  out.bottomRightCorner(m, m) = p.fT(half_sum);
  return (out + out.transpose()) / Scalar(2);
}

template <typename Scalar>
FactorizationResult<Scalar> factor_sqrt_sym(const MatrixX<Scalar>& l) {
  FactorizationResult<Scalar> r;
  r.C = sqrt_M_sym(l);
  r.reconstruction_error = detail::reconstruction_error(r.C, cp_preconditioner(l, Scalar(1), Scalar(1)));
  r.route = FactorRoute::sqrt_sym;
  return r;
}

template <typename Scalar>
FactorizationResult<Scalar> factor_sqrt_polar(const MatrixX<Scalar>& l, Scalar sigma = Scalar(1)) {
  FactorizationResult<Scalar> r;
  r.C = sqrt_M_polar(l, sigma);
  r.reconstruction_error = detail::reconstruction_error(r.C, cp_preconditioner(l, sigma, sigma));
  r.route = FactorRoute::sqrt_polar;
  return r;
}

/// M_λ = [[1, -λ], [-λ, 1]] for |λ| <= 1. Returns the symmetric square root
/// S_λ when |λ| < 1 and the 2x1 factor (1, ∓1) when λ = ±1.
template <typename Scalar>
FactorizationResult<Scalar> factor_scalar_2x2(Scalar lambda) {
  if (!(std::abs(lambda) <= Scalar(1))) throw InvalidConfig("factor_scalar_2x2: |lambda| must be <= 1");
  MatrixX<Scalar> m(2, 2);
  m << Scalar(1), -lambda, -lambda, Scalar(1);
  FactorizationResult<Scalar> r;
  r.route = FactorRoute::scalar_2x2;
  if (std::abs(lambda) == Scalar(1)) {
    r.C.resize(2, 1);
    r.C << Scalar(1), -lambda;
  } else {
    const Scalar a = std::sqrt(Scalar(1) - lambda), b = std::sqrt(Scalar(1) + lambda);
    r.C.resize(2, 2);
    r.C << a + b, a - b, a - b, a + b;
    r.C /= Scalar(2);
  }
  r.reconstruction_error = detail::reconstruction_error(r.C, m);
  return r;
}

template <typename Scalar = double>
struct TrigFormCheck {
  Scalar difference = 0;
  bool within_tolerance = false;
};

/// Builds [[cos(A/2), -U^T sin(B/2)], [-U sin(A/2), cos(B/2)]] with
/// A = arcsin(S), B = arcsin(T) and compares it with sqrt_M_polar(L, 1).
template <typename Scalar>
TrigFormCheck<Scalar> trig_form_check(const MatrixX<Scalar>& l, Scalar tol) {
  detail::require_finite(l, "trig_form_check");
  detail::Polar<Scalar> p(l);
  for (Index i = 0; i < p.s.size(); ++i)
    if (p.s(i) > Scalar(1) + Scalar(1e-12)) throw InvalidInput("trig_form_check: |L| exceeds 1");
  const Scalar floor = Scalar(l.rows() + l.cols()) * Tolerances<Scalar>::eps();
  auto clamp01 = [&](Scalar x) { return x >= Scalar(1) - floor ? Scalar(1) : std::max(x, Scalar(0)); };
  auto cos_half = [&](Scalar x) { return std::cos(std::asin(clamp01(x)) / Scalar(2)); };
  auto sin_half = [&](Scalar x) { return std::sin(std::asin(clamp01(x)) / Scalar(2)); };
  const MatrixX<Scalar> u = p.U();
  const Index m = l.rows(), n = l.cols();
  MatrixX<Scalar> w(n + m, n + m);
  w.topLeftCorner(n, n) = p.fS(cos_half);
  w.topRightCorner(n, m) = -u.transpose() * p.fT(sin_half);
  w.bottomLeftCorner(m, n) = -u * p.fS(sin_half);
  w.bottomRightCorner(m, m) = p.fT(cos_half);
  TrigFormCheck<Scalar> out;
  out.difference = operator_norm(MatrixX<Scalar>(w - sqrt_M_polar(l, Scalar(1))));
  out.within_tolerance = out.difference <= tol;
  return out;
}

}  // namespace ppp
