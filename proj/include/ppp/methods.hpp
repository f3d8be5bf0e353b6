#pragma once

// Builders for Douglas-Rachford, Chambolle-Pock, Ryu and Malitsky-Tam as
// PPP instances. Every (M+A)^{-1} is an explicit recursion over resolvents.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ppp/analysis.hpp"
#include "ppp/monotone_ops.hpp"
#include "ppp/ppp_core.hpp"

namespace ppp {

namespace detail {

template <typename Scalar>
MatrixX<Scalar> kron_identity(const MatrixX<Scalar>& pattern, Index d) {
  MatrixX<Scalar> out = MatrixX<Scalar>::Zero(pattern.rows() * d, pattern.cols() * d);
  for (Index i = 0; i < pattern.rows(); ++i)
    for (Index j = 0; j < pattern.cols(); ++j)
      if (pattern(i, j) != Scalar(0))
        out.block(i * d, j * d, d, d) = pattern(i, j) * MatrixX<Scalar>::Identity(d, d);
  return out;
}

}  // namespace detail

/// C = [Id; -Id] on X = R^d.
template <typename Scalar = double>
MatrixX<Scalar> dr_C(Index d) {
  MatrixX<Scalar> p(2, 1);
  p << Scalar(1), Scalar(-1);
  return detail::kron_identity(p, d);
}

/// 5x2 block pattern [[I,0],[0,I],[-I,-I],[I,0],[0,I]].
template <typename Scalar = double>
MatrixX<Scalar> ryu_C(Index d) {
  MatrixX<Scalar> p(5, 2);
  p << 1, 0, 0, 1, -1, -1, 1, 0, 0, 1;
  return detail::kron_identity(p, d);
}

/// (2n-1) x (n-1) block pattern: bidiagonal (I on the diagonal, -I below) over the identity.
template <typename Scalar = double>
MatrixX<Scalar> mt_C(Index n, Index d) {
  if (n < 3) throw InvalidConfig("mt_C: n must be at least 3");
  MatrixX<Scalar> p = MatrixX<Scalar>::Zero(2 * n - 1, n - 1);
  for (Index j = 0; j < n - 1; ++j) {
    p(j, j) = Scalar(1);
    p(j + 1, j) = Scalar(-1);
    p(n + j, j) = Scalar(1);
  }
  return detail::kron_identity(p, d);
}

/// Douglas-Rachford: (M+A)^{-1}(x, y) = (J_{A1} x, J_{A2^{-1}}(y + 2 J_{A1} x)).
template <typename Scalar>
PPPInstance<Scalar> build_dr(const ResolventOp<Scalar>& a1, const ResolventOp<Scalar>& a2) {
  detail::require_dims(a1.dim() == a2.dim(), "build_dr");
  const Index d = a1.dim();
  auto resolvent_ma = [a1, a2, d](const VectorX<Scalar>& u) {
    const VectorX<Scalar> p = a1.resolvent(u.head(d));
    VectorX<Scalar> out(2 * d);
    out.head(d) = p;
    out.tail(d) = inverse_resolvent(a2, Scalar(1), VectorX<Scalar>(u.tail(d) + Scalar(2) * p));
    return out;
  };
  auto apply_m = [d](const VectorX<Scalar>& u) {
    const VectorX<Scalar> diff = u.head(d) - u.tail(d);
    VectorX<Scalar> out(2 * d);
    out << diff, -diff;
    return out;
  };
  return PPPInstance<Scalar>(dr_C<Scalar>(d), resolvent_ma, "dr", apply_m);
}

/// Chambolle-Pock with A1 on X = R^n, A2 on Y = R^m, L : X -> Y (m x n):
/// (M+A)^{-1}(x, y) = (p, J_{τA2^{-1}}(2τ L p + τ y)) with p = J_{σA1}(σ x).
/// C comes from the Cholesky factorization, so rPPP coordinates depend on that choice.
template <typename Scalar>
PPPInstance<Scalar> build_cp(const ResolventOp<Scalar>& a1, const ResolventOp<Scalar>& a2,
                             const MatrixX<Scalar>& l, Scalar sigma, Scalar tau) {
  detail::require_dims(l.rows() == a2.dim() && l.cols() == a1.dim(), "build_cp");
  if (!(sigma > Scalar(0) && tau > Scalar(0))) throw InvalidConfig("build_cp: sigma, tau must be positive");
  auto factor = factor_cholesky(l, sigma, tau);
  const Index n = l.cols(), m = l.rows();
  auto lp = std::make_shared<const MatrixX<Scalar>>(l);
  auto resolvent_ma = [a1, a2, lp, sigma, tau, n, m](const VectorX<Scalar>& u) {
    const VectorX<Scalar> p = a1.resolvent(VectorX<Scalar>(sigma * u.head(n)), sigma);
    VectorX<Scalar> out(n + m);
    out.head(n) = p;
    out.tail(m) = inverse_resolvent(a2, tau, VectorX<Scalar>(Scalar(2) * tau * (*lp * p) + tau * u.tail(m)));
    return out;
  };
  auto apply_m = [lp, sigma, tau, n, m](const VectorX<Scalar>& u) {
    VectorX<Scalar> out(n + m);
    out.head(n) = u.head(n) / sigma - lp->transpose() * u.tail(m);
    out.tail(m) = u.tail(m) / tau - *lp * u.head(n);
    return out;
  };
  return PPPInstance<Scalar>(std::move(factor.C), resolvent_ma, "cp", apply_m);
}

/// Ryu three-operator splitting on H = X^5, D = X^2.
template <typename Scalar>
PPPInstance<Scalar> build_ryu(const ResolventOp<Scalar>& a1, const ResolventOp<Scalar>& a2,
                              const ResolventOp<Scalar>& a3) {
  detail::require_dims(a1.dim() == a2.dim() && a2.dim() == a3.dim(), "build_ryu");
  const Index d = a1.dim();
  auto resolvent_ma = [a1, a2, a3, d](const VectorX<Scalar>& x) {
    auto blk = [&](Index i) { return x.segment(i * d, d); };
    const VectorX<Scalar> y1 = a1.resolvent(VectorX<Scalar>(blk(0) / Scalar(2)));
    const VectorX<Scalar> y2 = a2.resolvent(VectorX<Scalar>(blk(1) / Scalar(2) + y1));
    const VectorX<Scalar> y3 = a3.resolvent(VectorX<Scalar>(blk(2) / Scalar(2) + y1 + y2));
    VectorX<Scalar> out(5 * d);
    out << y1, y2, y3, blk(3) - Scalar(2) * y1 + Scalar(2) * y3, blk(4) - Scalar(2) * y2 + Scalar(2) * y3;
    return out;
  };
  return PPPInstance<Scalar>(ryu_C<Scalar>(d), resolvent_ma, "ryu");
}

/// Malitsky-Tam for n >= 3 operators on H = X^{2n-1}, D = X^{n-1}.
template <typename Scalar>
PPPInstance<Scalar> build_mt(const std::vector<ResolventOp<Scalar>>& ops) {
  const Index n = static_cast<Index>(ops.size());
  if (n < 3) throw InvalidConfig("build_mt: at least 3 operators are required");
  const Index d = ops.front().dim();
  for (const auto& op : ops) detail::require_dims(op.dim() == d, "build_mt");
  auto resolvent_ma = [ops, n, d](const VectorX<Scalar>& u) {
    std::vector<VectorX<Scalar>> y(static_cast<std::size_t>(n));
    auto x = [&](Index i) { return u.segment(i * d, d); };
    y[0] = ops[0].resolvent(VectorX<Scalar>(x(0) / Scalar(2)));
    for (Index i = 1; i < n - 1; ++i)
      y[std::size_t(i)] = ops[std::size_t(i)].resolvent(VectorX<Scalar>(x(i) / Scalar(2) + y[std::size_t(i - 1)]));
    y[std::size_t(n - 1)] =
        ops[std::size_t(n - 1)].resolvent(VectorX<Scalar>(x(n - 1) / Scalar(2) + y[0] + y[std::size_t(n - 2)]));
    VectorX<Scalar> out(u.size());
    for (Index i = 0; i < n; ++i) out.segment(i * d, d) = y[std::size_t(i)];
    for (Index i = 0; i < n - 1; ++i)
      out.segment((n + i) * d, d) =
          u.segment((n + i) * d, d) - Scalar(2) * y[std::size_t(i)] + Scalar(2) * y[std::size_t(i + 1)];
    return out;
  };
  return PPPInstance<Scalar>(mt_C<Scalar>(n, d), resolvent_ma, "mt");
}

enum class MethodFamily { dr, cp, ryu, mt };

inline const char* to_string(MethodFamily f) {
  switch (f) {
    case MethodFamily::dr: return "dr";
    case MethodFamily::cp: return "cp";
    case MethodFamily::ryu: return "ryu";
    case MethodFamily::mt: return "mt";
  }
  return "unknown";
}

inline MethodFamily parse_method_family(const std::string& s) {
  if (s == "dr") return MethodFamily::dr;
  if (s == "cp") return MethodFamily::cp;
  if (s == "ryu") return MethodFamily::ryu;
  if (s == "mt") return MethodFamily::mt;
  throw InvalidConfig("unknown method '" + s + "' (expected dr, cp, ryu or mt)");
}

/// A method family together with its operands and parameters.
template <typename Scalar = double>
struct MethodDescriptor {
  MethodFamily family = MethodFamily::dr;
  std::vector<ResolventOp<Scalar>> ops;
  Scalar sigma = 1;
  Scalar tau = 1;
  std::optional<MatrixX<Scalar>> L;

  Index n() const { return static_cast<Index>(ops.size()); }

  void validate() const {
    switch (family) {
      case MethodFamily::dr:
        if (ops.size() != 2) throw InvalidConfig("dr: exactly 2 operators required");
        if (ops[0].dim() != ops[1].dim()) throw InvalidConfig("dr: operator dimensions differ");
        break;
      case MethodFamily::cp: {
        if (ops.size() != 2) throw InvalidConfig("cp: exactly 2 operators required");
        if (!L) throw InvalidConfig("cp: coupling matrix L missing");
        if (!(sigma > Scalar(0) && tau > Scalar(0))) throw InvalidConfig("cp: sigma and tau must be positive");
        if (L->rows() != ops[1].dim() || L->cols() != ops[0].dim())
          throw InvalidConfig("cp: L must map the space of A1 into the space of A2");
        const Scalar ln = operator_norm(*L);
        if (sigma * tau * ln * ln > Scalar(1) + Scalar(1e-12))
          throw InvalidConfig("cp: sigma*tau*|L|^2 exceeds 1");
        break;
      }
      case MethodFamily::ryu:
        if (ops.size() != 3) throw InvalidConfig("ryu: exactly 3 operators required");
        for (const auto& op : ops)
          if (op.dim() != ops[0].dim()) throw InvalidConfig("ryu: operator dimensions differ");
        break;
      case MethodFamily::mt:
        if (ops.size() < 3) throw InvalidConfig("mt: n must be at least 3");
        for (const auto& op : ops)
          if (op.dim() != ops[0].dim()) throw InvalidConfig("mt: operator dimensions differ");
        break;
    }
  }

  PPPInstance<Scalar> build() const {
    validate();
    switch (family) {
      case MethodFamily::dr: return build_dr(ops[0], ops[1]);
      case MethodFamily::cp: return build_cp(ops[0], ops[1], *L, sigma, tau);
      case MethodFamily::ryu: return build_ryu(ops[0], ops[1], ops[2]);
      case MethodFamily::mt: return build_mt(ops);
    }
    throw InvalidConfig("unknown method family");
  }
};

}  // namespace ppp
