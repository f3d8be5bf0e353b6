#pragma once

// Maximally monotone operators, available only through their resolvents
// J_{γA} = (Id + γA)^{-1}. The graph of A is never materialized.

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <variant>

#include "ppp/linalg.hpp"

namespace ppp {

template <typename Scalar = double>
class ResolventOp {
public:
  using VectorType = VectorX<Scalar>;
  using MatrixType = MatrixX<Scalar>;
  /// A resolvent family supplied by the caller: (γ, x) ↦ J_{γA}(x).
  using Family = std::function<VectorType(Scalar, const VectorType&)>;

  enum class Kind { zero, normal_cone_subspace, normal_cone_affine, normal_cone_point, linear_monotone, scaled, family };

  static ResolventOp zero(Index dim) {
    if (dim <= 0) throw InvalidInput("ResolventOp::zero: dimension must be positive");
    return ResolventOp(dim, Zero{});
  }

  /// N_U for a linear subspace U; J = P_U for every γ.
  static ResolventOp normal_cone(Subspace<Scalar> u) {
    const Index d = u.ambient_dim();
    return ResolventOp(d, ConeSubspace{std::move(u)});
  }

  /// N_{a+U}; J(x) = a + P_U(x - a).
  static ResolventOp normal_cone_affine(Subspace<Scalar> u, VectorType anchor) {
    detail::require_dims(anchor.size() == u.ambient_dim(), "ResolventOp::normal_cone_affine");
    detail::require_finite(anchor, "ResolventOp::normal_cone_affine");
    const Index d = u.ambient_dim();
    return ResolventOp(d, ConeAffine{std::move(u), std::move(anchor)});
  }

  /// N_{{b}}; J(x) = b.
  static ResolventOp normal_cone_point(VectorType b) {
    detail::require_finite(b, "ResolventOp::normal_cone_point");
    const Index d = b.size();
    return ResolventOp(d, ConePoint{std::move(b)});
  }

  /// x ↦ Bx with B + B^T ⪰ 0 (skew parts allowed).
  static ResolventOp linear_monotone(MatrixType b) {
    if (b.rows() != b.cols() || b.rows() == 0)
      throw DimensionMismatch("ResolventOp::linear_monotone: B must be square and nonempty");
    detail::require_finite(b, "ResolventOp::linear_monotone");
    const MatrixType sym = b + b.transpose();
    Eigen::SelfAdjointEigenSolver<MatrixType> es(sym, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -Tolerances<Scalar>::psd_clamp())
      throw InvalidInput("ResolventOp::linear_monotone: B + B^T is not positive semidefinite");
    const Index d = b.rows();
    return ResolventOp(d, Linear{std::move(b)});
  }

  /// γA for γ > 0.
  static ResolventOp scaled(Scalar gamma, ResolventOp op) {
    if (!(gamma > Scalar(0))) throw InvalidInput("ResolventOp::scaled: gamma must be positive");
    const Index d = op.dim();
    return ResolventOp(d, Scaled{gamma, std::make_shared<const ResolventOp>(std::move(op))});
  }

  /// Caller-provided resolvent family. The caller is responsible for it being
  /// the resolvent of a maximally monotone operator.
  static ResolventOp from_family(Index dim, Family family, std::string name = "family") {
    if (dim <= 0 || !family) throw InvalidInput("ResolventOp::from_family: invalid arguments");
    return ResolventOp(dim, FamilyOp{std::move(family), std::move(name)});
  }

  Index dim() const { return dim_; }

  Kind kind() const { return static_cast<Kind>(impl_.index()); }

  /// The subspace U for normal_cone_subspace / normal_cone_affine operators.
  const Subspace<Scalar>* cone_subspace() const {
    if (auto* c = std::get_if<ConeSubspace>(&impl_)) return &c->u;
    if (auto* c = std::get_if<ConeAffine>(&impl_)) return &c->u;
    return nullptr;
  }

  /// J_{γA}(x).
  VectorType resolvent(const VectorType& x, Scalar gamma = Scalar(1)) const {
    detail::require_dims(x.size() == dim_, "resolvent");
    return std::visit([&](const auto& k) { return apply(k, gamma, x); }, impl_);
  }

private:
  struct Zero {};
  struct ConeSubspace { Subspace<Scalar> u; };
  struct ConeAffine { Subspace<Scalar> u; VectorType anchor; };
  struct ConePoint { VectorType b; };
  struct Linear { MatrixType b; };
  struct Scaled { Scalar gamma; std::shared_ptr<const ResolventOp> inner; };
  struct FamilyOp { Family family; std::string name; };

  using Impl = std::variant<Zero, ConeSubspace, ConeAffine, ConePoint, Linear, Scaled, FamilyOp>;

  ResolventOp(Index dim, Impl impl) : dim_(dim), impl_(std::move(impl)) {}

  static VectorType apply(const Zero&, Scalar, const VectorType& x) { return x; }
  static VectorType apply(const ConeSubspace& k, Scalar, const VectorType& x) { return project(k.u, x); }
  static VectorType apply(const ConeAffine& k, Scalar, const VectorType& x) {
    return k.anchor + project(k.u, VectorType(x - k.anchor));
  }
  static VectorType apply(const ConePoint& k, Scalar, const VectorType&) { return k.b; }
  static VectorType apply(const Linear& k, Scalar gamma, const VectorType& x) {
    const MatrixType sys = MatrixType::Identity(k.b.rows(), k.b.cols()) + gamma * k.b;
    return sys.partialPivLu().solve(x);
  }
  static VectorType apply(const Scaled& k, Scalar gamma, const VectorType& x) {
    return k.inner->resolvent(x, gamma * k.gamma);
  }
  static VectorType apply(const FamilyOp& k, Scalar gamma, const VectorType& x) {
    VectorType y = k.family(gamma, x);
    if (y.size() != x.size()) throw DimensionMismatch("resolvent family '" + k.name + "' returned wrong size");
    return y;
  }

  Index dim_;
  Impl impl_;
};

template <typename Scalar>
VectorX<Scalar> resolvent(const ResolventOp<Scalar>& op, const VectorX<Scalar>& x) {
  return op.resolvent(x);
}

/// R_A = 2 J_A - Id.
template <typename Scalar>
VectorX<Scalar> reflected_resolvent(const ResolventOp<Scalar>& op, const VectorX<Scalar>& x) {
  return Scalar(2) * op.resolvent(x) - x;
}

/// J_{τA^{-1}}(x) = x - τ J_{A/τ}(x/τ).
template <typename Scalar>
VectorX<Scalar> inverse_resolvent(const ResolventOp<Scalar>& op, Scalar tau, const VectorX<Scalar>& x) {
  if (!(tau > Scalar(0))) throw InvalidInput("inverse_resolvent: tau must be positive");
  return x - tau * op.resolvent(VectorX<Scalar>(x / tau), Scalar(1) / tau);
}

}  // namespace ppp
