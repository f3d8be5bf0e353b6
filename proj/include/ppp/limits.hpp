#pragma once

// Closed-form fixed-point sets and limits for the subspace and affine
// specializations, plus least-squares and null-space oracles.

#include <utility>
#include <vector>

#include "ppp/analysis.hpp"
#include "ppp/linalg.hpp"
#include "ppp/methods.hpp"
#include "ppp/ppp_core.hpp"

namespace ppp {

template <typename Scalar = double>
struct FixSets {
  Subspace<Scalar> fix_T;
  Subspace<Scalar> fix_Ttilde;
};

template <typename Scalar = double>
struct LimitPrediction {
  VectorX<Scalar> w_star;
  VectorX<Scalar> u_star;
};

template <typename Scalar = double>
struct FixAndLimits {
  FixSets<Scalar> fix;
  LimitPrediction<Scalar> limit;
};

/// Fixed-point sets with P_{Fix T~}(C^T u) and the M-projection of u onto Fix T.
template <typename Scalar = double>
struct FixAndProjection {
  FixSets<Scalar> fix;
  VectorX<Scalar> w_star;
  VectorX<Scalar> m_projection;
};

/// anchor + direction, with anchor the point of least norm.
template <typename Scalar = double>
struct AffineSet {
  VectorX<Scalar> anchor;
  Subspace<Scalar> direction;

  bool singleton() const { return direction.is_trivial(); }
  VectorX<Scalar> project(const VectorX<Scalar>& v) const {
    return anchor + ppp::project(direction, VectorX<Scalar>(v - anchor));
  }
};

template <typename Scalar = double>
struct MProjectionOracle {
  /// Minimizer of |C^T(u0 - u)| over Fix T from the minimum-norm coordinate solve.
  VectorX<Scalar> point;
  /// The same minimizer from a pseudo-inverse solve.
  VectorX<Scalar> pinv_point;
  /// Dimension of the coordinate solution set; 0 means the coordinates are unique.
  Index coordinate_nullity = 0;
};

namespace detail {

/// Minimum-norm least-squares solution of a c = rhs and the numerical rank of a.
template <typename Scalar>
std::pair<VectorX<Scalar>, Index> min_norm_solve(const MatrixX<Scalar>& a, const VectorX<Scalar>& rhs) {
  if (a.cols() == 0) return {VectorX<Scalar>(0), 0};
  Eigen::CompleteOrthogonalDecomposition<MatrixX<Scalar>> cod(a);
  cod.setThreshold(Tolerances<Scalar>::rank());
  return {cod.solve(rhs), cod.rank()};
}

}  // namespace detail

/// argmin over u in fix_T of |C^T(u0 - u)|, by least squares in basis coordinates.
template <typename Scalar>
MProjectionOracle<Scalar> m_projection_oracle(const PPPInstance<Scalar>& inst, const Subspace<Scalar>& fix_T,
                                              const VectorX<Scalar>& u0) {
  detail::require_dims(fix_T.ambient_dim() == inst.dim_H() && u0.size() == inst.dim_H(), "m_projection_oracle");
  MProjectionOracle<Scalar> out;
  if (fix_T.is_trivial()) {
    out.point = out.pinv_point = VectorX<Scalar>::Zero(inst.dim_H());
    return out;
  }
  const MatrixX<Scalar> a = inst.C().transpose() * fix_T.basis();
  const VectorX<Scalar> rhs = inst.apply_Ct(u0);
  auto [c, rank] = detail::min_norm_solve(a, rhs);
  out.point = fix_T.basis() * c;
  out.pinv_point = fix_T.basis() * (pseudo_inverse(a) * rhs);
  out.coordinate_nullity = fix_T.rank() - rank;
  return out;
}

/// Π_S^M(h) = argmin over s in S of |C^T(h - s)| as an affine set; the
/// direction is S ∩ ker C^T, so the set is a singleton exactly when that is {0}.
template <typename Scalar>
AffineSet<Scalar> pi_S_M(const PPPInstance<Scalar>& inst, const Subspace<Scalar>& s, const VectorX<Scalar>& h) {
  detail::require_dims(s.ambient_dim() == inst.dim_H() && h.size() == inst.dim_H(), "pi_S_M");
  AffineSet<Scalar> out;
  if (s.is_trivial()) {
    out.anchor = VectorX<Scalar>::Zero(inst.dim_H());
    out.direction = Subspace<Scalar>::trivial(inst.dim_H());
    return out;
  }
  const MatrixX<Scalar> a = inst.C().transpose() * s.basis();
  auto [c, rank] = detail::min_norm_solve(a, inst.apply_Ct(h));
  (void)rank;
  const Scalar scale = std::max(Scalar(1), operator_norm(a));
  const Subspace<Scalar> kernel = null_space(a, Tolerances<Scalar>::rank(), scale);
  out.direction = kernel.is_trivial() ? Subspace<Scalar>::trivial(inst.dim_H())
                                      : Subspace<Scalar>::from_orthonormal(s.basis() * kernel.basis());
  const VectorX<Scalar> p = s.basis() * c;
  out.anchor = p - project(out.direction, p);
  return out;
}

/// Π_S^M(h) for a DR-shaped instance and S = S1 x S2.
template <typename Scalar>
AffineSet<Scalar> pi_S_M(const PPPInstance<Scalar>& inst, const Subspace<Scalar>& s1, const Subspace<Scalar>& s2,
                         const VectorX<Scalar>& h) {
  detail::require_dims(s1.ambient_dim() + s2.ambient_dim() == inst.dim_H(), "pi_S_M");
  return pi_S_M(inst, product(s1, s2), h);
}

/// Douglas-Rachford with A1 = N_{U1}, A2 = N_{U2}:
/// Fix T = (U1∩U2) x (U1⊥∩U2⊥), Fix T~ = (U1∩U2) + (U1⊥∩U2⊥),
/// u* = (P_{U1∩U2}(x0-y0), P_{U1⊥∩U2⊥}(y0-x0)).
template <typename Scalar>
FixAndLimits<Scalar> dr_fix_and_limits(const Subspace<Scalar>& u1, const Subspace<Scalar>& u2,
                                       const VectorX<Scalar>& u0) {
  const Index d = u1.ambient_dim();
  detail::require_dims(u2.ambient_dim() == d && u0.size() == 2 * d, "dr_fix_and_limits");
  const Subspace<Scalar> both = intersect(u1, u2);
  const Subspace<Scalar> neither = intersect(complement(u1), complement(u2));
  FixAndLimits<Scalar> out;
  out.fix.fix_T = product(both, neither);
  out.fix.fix_Ttilde = sum(both, neither);
  const VectorX<Scalar> w0 = u0.head(d) - u0.tail(d);
  const VectorX<Scalar> p = project(both, w0), q = project(neither, w0);
  out.limit.w_star = p + q;
  out.limit.u_star.resize(2 * d);
  out.limit.u_star << p, -q;
  return out;
}

/// Chambolle-Pock with A1 = N_U on X = R^n, A2 = N_V on Y = R^m:
/// Fix T = (U ∩ L^{-1}V) x (V⊥ ∩ L^{-T}U⊥),
/// u* = (P_{U∩L^{-1}V}(x0 - σL^T y0), P_{V⊥∩L^{-T}U⊥}(y0 - τ L x0)).
/// The reduced-space objects use the Cholesky factor held by build_cp.
template <typename Scalar>
FixAndLimits<Scalar> cp_fix_and_limits(const Subspace<Scalar>& u, const Subspace<Scalar>& v, const MatrixX<Scalar>& l,
                                       Scalar sigma, Scalar tau, const VectorX<Scalar>& u0) {
  const Index n = l.cols(), m = l.rows();
  detail::require_dims(u.ambient_dim() == n && v.ambient_dim() == m && u0.size() == n + m, "cp_fix_and_limits");
  const MatrixX<Scalar> c = factor_cholesky(l, sigma, tau).C;
  const Subspace<Scalar> primal = intersect(u, preimage(l, v));
  const MatrixX<Scalar> lt = l.transpose();
  const Subspace<Scalar> dual = intersect(complement(v), preimage(lt, complement(u)));
  FixAndLimits<Scalar> out;
  out.fix.fix_T = product(primal, dual);
  out.fix.fix_Ttilde = image(MatrixX<Scalar>(c.transpose()), out.fix.fix_T);
  const VectorX<Scalar> x0 = u0.head(n), y0 = u0.tail(m);
  out.limit.u_star.resize(n + m);
  out.limit.u_star << project(primal, VectorX<Scalar>(x0 - sigma * (lt * y0))),
      project(dual, VectorX<Scalar>(y0 - tau * (l * x0)));
  out.limit.w_star = c.transpose() * out.limit.u_star;
  return out;
}

template <typename Scalar = double>
struct AffineLimit {
  /// U ∩ L^{-1}(b).
  AffineSet<Scalar> primal_set;
  LimitPrediction<Scalar> limit;
  /// Least-squares residual min over x in U of |Lx - b|.
  Scalar feasibility_residual = 0;
};

/// Chambolle-Pock with A1 = N_U and A2 = N_{b}:
/// x* = P_{U∩L^{-1}(b)}(x0 - σL^T y0), y* = P_{L^{-T}(U⊥)}(y0 - τ L x0).
/// Throws Infeasible when min over x in U of |Lx - b| exceeds 1e-8.
template <typename Scalar>
AffineLimit<Scalar> cp_affine_limits(const Subspace<Scalar>& u, const VectorX<Scalar>& b, const MatrixX<Scalar>& l,
                                     Scalar sigma, Scalar tau, const VectorX<Scalar>& u0,
                                     bool with_reduced = true) {
  const Index n = l.cols(), m = l.rows();
  detail::require_dims(u.ambient_dim() == n && b.size() == m && u0.size() == n + m, "cp_affine_limits");
  AffineLimit<Scalar> out;
  const MatrixX<Scalar> lb = l * u.basis();
  auto [c, rank] = detail::min_norm_solve(lb, b);
  (void)rank;
  out.feasibility_residual = u.rank() ? (lb * c - b).norm() : b.norm();
  if (!(out.feasibility_residual <= Scalar(1e-8)))
    throw Infeasible("cp_affine_limits: U ∩ L^{-1}(b) is empty", double(out.feasibility_residual));
  const Scalar lnorm = std::max(Scalar(1), operator_norm(l));
  const Subspace<Scalar> kernel = u.rank() ? null_space(lb, Tolerances<Scalar>::rank(), lnorm)
                                           : Subspace<Scalar>::trivial(0);
  out.primal_set.direction = kernel.is_trivial() ? Subspace<Scalar>::trivial(n)
                                                 : Subspace<Scalar>::from_orthonormal(u.basis() * kernel.basis());
  const VectorX<Scalar> xp = u.rank() ? VectorX<Scalar>(u.basis() * c) : VectorX<Scalar>::Zero(n);
  out.primal_set.anchor = xp - project(out.primal_set.direction, xp);

  const MatrixX<Scalar> lt = l.transpose();
  const Subspace<Scalar> dual = preimage(lt, complement(u));
  const VectorX<Scalar> x0 = u0.head(n), y0 = u0.tail(m);
  out.limit.u_star.resize(n + m);
  out.limit.u_star << out.primal_set.project(VectorX<Scalar>(x0 - sigma * (lt * y0))),
      project(dual, VectorX<Scalar>(y0 - tau * (l * x0)));
  if (with_reduced) out.limit.w_star = factor_cholesky(l, sigma, tau).C.transpose() * out.limit.u_star;
  return out;
}

namespace detail {

/// Repeats the columns of `block` down `copies` row blocks, scaled per block.
template <typename Scalar>
MatrixX<Scalar> stacked(const MatrixX<Scalar>& block, const std::vector<Scalar>& weights) {
  const Index d = block.rows();
  MatrixX<Scalar> out(d * Index(weights.size()), block.cols());
  for (std::size_t i = 0; i < weights.size(); ++i) out.middleRows(Index(i) * d, d) = weights[i] * block;
  return out;
}

template <typename Scalar>
Subspace<Scalar> intersect_all(const std::vector<Subspace<Scalar>>& us) {
  Subspace<Scalar> z = us.front();
  for (std::size_t i = 1; i < us.size(); ++i) z = intersect(z, us[i]);
  return z;
}

}  // namespace detail

/// Ryu with A_i = N_{U_i}: Z = U1∩U2∩U3, E = (U1⊥ x U2⊥) ∩ (Δ2⊥ + ({0} x U3⊥)),
/// Fix T~ = (Z x {0}) ⊕ E, Fix T = {(z,z,z,2z,0)} ⊕ ({0}^3 x E).
template <typename Scalar>
FixAndProjection<Scalar> ryu_fix_and_projection(const Subspace<Scalar>& u1, const Subspace<Scalar>& u2,
                                                const Subspace<Scalar>& u3, const VectorX<Scalar>& u) {
  const Index d = u1.ambient_dim();
  detail::require_dims(u2.ambient_dim() == d && u3.ambient_dim() == d && u.size() == 5 * d,
                       "ryu_fix_and_projection");
  const Subspace<Scalar> z = detail::intersect_all<Scalar>({u1, u2, u3});
  const MatrixX<Scalar> id = MatrixX<Scalar>::Identity(d, d);
  const Subspace<Scalar> anti_diagonal = orthonormal_basis(MatrixX<Scalar>(vstack<Scalar>(id, -id)));
  const Subspace<Scalar> e = intersect(product(complement(u1), complement(u2)),
                                       sum(anti_diagonal, product(Subspace<Scalar>::trivial(d), complement(u3))));
  FixAndProjection<Scalar> out;
  out.fix.fix_Ttilde = sum(product(z, Subspace<Scalar>::trivial(d)), e);
  const MatrixX<Scalar> s_cols =
      detail::stacked<Scalar>(z.basis(), {Scalar(1), Scalar(1), Scalar(1), Scalar(2), Scalar(0)});
  out.fix.fix_T = sum(orthonormal_basis(s_cols), product(Subspace<Scalar>::trivial(3 * d), e));

  const VectorX<Scalar> w = ryu_C<Scalar>(d).transpose() * u;
  const VectorX<Scalar> pz = project(z, VectorX<Scalar>(w.head(d)));
  out.w_star = project(e, w);
  out.w_star.head(d) += pz;
  out.m_projection.resize(5 * d);
  out.m_projection << pz / Scalar(2), pz / Scalar(2), pz / Scalar(2), out.w_star;
  return out;
}

/// Malitsky-Tam with A_i = N_{U_i}, n >= 3: E = ran Ψ ∩ (X^{n-2} x Un⊥) with
/// Ψ(y_1..y_n) = (y_1, y_1+y_2, ..., y_1+...+y_{n-1}), y_i in U_i⊥,
/// Fix T~ = Δ_{Z^{n-1}} ⊕ E, Fix T = {(x,..,x, 2x,..,2x) : x in Z} ⊕ ({0}^n x E).
template <typename Scalar>
FixAndProjection<Scalar> mt_fix_and_projection(const std::vector<Subspace<Scalar>>& us, const VectorX<Scalar>& u) {
  const Index n = static_cast<Index>(us.size());
  if (n < 3) throw InvalidConfig("mt_fix_and_projection: at least 3 subspaces are required");
  const Index d = us.front().ambient_dim();
  for (const auto& s : us) detail::require_dims(s.ambient_dim() == d, "mt_fix_and_projection");
  detail::require_dims(u.size() == (2 * n - 1) * d, "mt_fix_and_projection");

  const Subspace<Scalar> z = detail::intersect_all(us);
  std::vector<MatrixX<Scalar>> perps;
  Index total = 0;
  for (Index i = 0; i < n - 1; ++i) {
    perps.push_back(complement(us[std::size_t(i)]).basis());
    total += perps.back().cols();
  }
  MatrixX<Scalar> psi = MatrixX<Scalar>::Zero((n - 1) * d, total);
  Index col = 0;
  for (Index i = 0; i < n - 1; ++i) {
    const MatrixX<Scalar>& q = perps[std::size_t(i)];
    for (Index row = i; row < n - 1; ++row) psi.block(row * d, col, d, q.cols()) = q;
    col += q.cols();
  }
  const Subspace<Scalar> ran_psi = orthonormal_basis(psi);
  const Subspace<Scalar> last = product(Subspace<Scalar>::full((n - 2) * d), complement(us.back()));
  const Subspace<Scalar> e = intersect(ran_psi, last);

  FixAndProjection<Scalar> out;
  const Subspace<Scalar> diag_z = orthonormal_basis(detail::stacked<Scalar>(z.basis(), std::vector<Scalar>(std::size_t(n - 1), Scalar(1))));
  out.fix.fix_Ttilde = sum(diag_z, e);
  std::vector<Scalar> weights(std::size_t(n), Scalar(1));
  weights.resize(std::size_t(2 * n - 1), Scalar(2));
  out.fix.fix_T = sum(orthonormal_basis(detail::stacked<Scalar>(z.basis(), weights)),
                      product(Subspace<Scalar>::trivial(n * d), e));

  const VectorX<Scalar> w = mt_C<Scalar>(n, d).transpose() * u;
  VectorX<Scalar> wbar = VectorX<Scalar>::Zero(d);
  for (Index i = 0; i < n - 1; ++i) wbar += w.segment(i * d, d);
  wbar /= Scalar(n - 1);
  const VectorX<Scalar> pz = project(z, wbar);
  out.w_star = project(e, w);
  for (Index i = 0; i < n - 1; ++i) out.w_star.segment(i * d, d) += pz;
  out.m_projection.resize(u.size());
  for (Index i = 0; i < n; ++i) out.m_projection.segment(i * d, d) = pz / Scalar(2);
  out.m_projection.tail((n - 1) * d) = out.w_star;
  return out;
}

/// w* = P_{Fix T~}(C^T u0), u* = (M+A)^{-1} C w*.
template <typename Scalar>
LimitPrediction<Scalar> predict_limits(const PPPInstance<Scalar>& inst, const Subspace<Scalar>& fix_Ttilde,
                                       const VectorX<Scalar>& u0) {
  detail::require_dims(fix_Ttilde.ambient_dim() == inst.dim_D(), "predict_limits");
  LimitPrediction<Scalar> out;
  out.w_star = project(fix_Ttilde, inst.apply_Ct(u0));
  out.u_star = inst.resolvent_MA(inst.apply_C(out.w_star));
  return out;
}

/// Matrices of T and T~ for an instance whose (M+A)^{-1} is linear.
template <typename Scalar>
MatrixX<Scalar> assemble_T(const PPPInstance<Scalar>& inst) {
  return assemble_linear<Scalar>([&](const VectorX<Scalar>& u) { return apply_T(inst, u); }, inst.dim_H());
}

template <typename Scalar>
MatrixX<Scalar> assemble_Ttilde(const PPPInstance<Scalar>& inst) {
  return assemble_linear<Scalar>([&](const VectorX<Scalar>& w) { return apply_Ttilde(inst, w); }, inst.dim_D());
}

/// Fix of a linear map given as a matrix: ker(T - I), rank decisions relative to max(1, |T - I|).
template <typename Scalar>
Subspace<Scalar> fix_subspace_oracle(const MatrixX<Scalar>& t) {
  if (t.rows() != t.cols()) throw DimensionMismatch("fix_subspace_oracle: matrix not square");
  const MatrixX<Scalar> a = t - MatrixX<Scalar>::Identity(t.rows(), t.cols());
  const Scalar scale = std::max(Scalar(1), operator_norm(a));
  return null_space(a, Scalar(1e-9), scale);
}

/// Mutual containment residual between C^T(Fix T) and Fix T~.
template <typename Scalar>
Scalar fix_correspondence_residual(const PPPInstance<Scalar>& inst, const Subspace<Scalar>& fix_T,
                                   const Subspace<Scalar>& fix_Ttilde) {
  const Subspace<Scalar> image_ct = image(MatrixX<Scalar>(inst.C().transpose()), fix_T);
  return subspace_distance(image_ct, fix_Ttilde);
}

}  // namespace ppp
