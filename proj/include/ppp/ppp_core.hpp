#pragma once

// Preconditioned proximal point (PPP) iteration on H and its reduced
// counterpart (rPPP) on D, for a preconditioner M = C C^T:
//
//   T  = (M+A)^{-1} M           u_{k+1} = (1-λ_k) u_k + λ_k T u_k
//   T~ = C^T (M+A)^{-1} C       w_{k+1} = (1-λ_k) w_k + λ_k T~ w_k
//
// with w_0 = C^T u_0. The two sequences are intertwined: w_k = C^T u_k and
// T u_k = (M+A)^{-1} C w_k for every k.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ppp/linalg.hpp"

namespace ppp {

/// A splitting problem: the factor C (dim_H x dim_D) and the map (M+A)^{-1}.
template <typename Scalar = double>
class PPPInstance {
public:
  using VectorType = VectorX<Scalar>;
  using MatrixType = MatrixX<Scalar>;
  using Map = std::function<VectorType(const VectorType&)>;

  /// `apply_m` optionally overrides u ↦ C C^T u with a structured evaluation of M.
  PPPInstance(MatrixType c, Map resolvent_ma, std::string label, Map apply_m = {})
      : c_(std::move(c)), resolvent_ma_(std::move(resolvent_ma)), apply_m_(std::move(apply_m)),
        label_(std::move(label)) {
    if (c_.rows() == 0 || c_.cols() == 0) throw InvalidInput("PPPInstance: C must be nonempty");
    if (!resolvent_ma_) throw InvalidInput("PPPInstance: missing (M+A)^{-1}");
    detail::require_finite(c_, "PPPInstance");
    if (c_.cols() > c_.rows())
      throw InvalidInput("PPPInstance: C^T cannot be surjective when dim_D > dim_H");
    auto svd = detail::thin_svd<Scalar>(c_, false, false);
    const Index rank = detail::count_above<Scalar>(svd.S, Tolerances<Scalar>::rank() * svd.S(0));
    if (rank != c_.cols()) throw InvalidInput("PPPInstance: C^T is not surjective (C lacks full column rank)");
  }

  Index dim_H() const { return c_.rows(); }
  Index dim_D() const { return c_.cols(); }
  const MatrixType& C() const { return c_; }
  const std::string& label() const { return label_; }

  /// M = C C^T, assembled.
  MatrixType M() const { return c_ * c_.transpose(); }

  VectorType apply_M(const VectorType& u) const {
    detail::require_dims(u.size() == dim_H(), "apply_M");
    if (apply_m_) return apply_m_(u);
    return c_ * (c_.transpose() * u);
  }

  VectorType resolvent_MA(const VectorType& x) const {
    detail::require_dims(x.size() == dim_H(), "resolvent_MA");
    return resolvent_ma_(x);
  }

  VectorType apply_C(const VectorType& w) const {
    detail::require_dims(w.size() == dim_D(), "apply_C");
    return c_ * w;
  }

  VectorType apply_Ct(const VectorType& u) const {
    detail::require_dims(u.size() == dim_H(), "apply_Ct");
    return c_.transpose() * u;
  }

private:
  MatrixType c_;
  Map resolvent_ma_;
  Map apply_m_;
  std::string label_;
};

/// T u = (M+A)^{-1} M u.
template <typename Scalar>
VectorX<Scalar> apply_T(const PPPInstance<Scalar>& inst, const VectorX<Scalar>& u) {
  return inst.resolvent_MA(inst.apply_M(u));
}

/// T~ w = C^T (M+A)^{-1} C w.
template <typename Scalar>
VectorX<Scalar> apply_Ttilde(const PPPInstance<Scalar>& inst, const VectorX<Scalar>& w) {
  return inst.apply_Ct(inst.resolvent_MA(inst.apply_C(w)));
}

/// |x|_M = sqrt(<x, Mx>) = |C^T x|.
template <typename Scalar>
Scalar seminorm_M(const PPPInstance<Scalar>& inst, const VectorX<Scalar>& x) {
  return inst.apply_Ct(x).norm();
}

/// Matrix of a linear map R^n -> R^m, assembled column by column.
template <typename Scalar, typename Fn>
MatrixX<Scalar> assemble_linear(Fn&& map, Index n) {
  MatrixX<Scalar> out;
  for (Index j = 0; j < n; ++j) {
    VectorX<Scalar> e = VectorX<Scalar>::Unit(n, j);
    VectorX<Scalar> col = map(e);
    if (j == 0) out.resize(col.size(), n);
    out.col(j) = col;
  }
  return out;
}

/// Relaxation parameters λ_k.
template <typename Scalar = double>
class LambdaSchedule {
public:
  LambdaSchedule() = default;

  /// Constant λ in (0, 2).
  static LambdaSchedule constant(Scalar lambda) {
    if (!(lambda > Scalar(0) && lambda < Scalar(2)))
      throw InvalidConfig("LambdaSchedule: constant lambda must lie in (0,2)");
    LambdaSchedule s;
    s.values_ = {lambda};
    s.constant_ = true;
    return s;
  }

  /// λ_0, λ_1, ... each in [0, 2]; the last value repeats once the list is exhausted.
  static LambdaSchedule explicit_list(std::vector<Scalar> values) {
    if (values.empty()) throw InvalidConfig("LambdaSchedule: empty list");
    for (Scalar v : values)
      if (!(v >= Scalar(0) && v <= Scalar(2))) throw InvalidConfig("LambdaSchedule: lambda_k outside [0,2]");
    LambdaSchedule s;
    s.values_ = std::move(values);
    s.constant_ = false;
    return s;
  }

  Scalar at(Index k) const {
    if (constant_) return values_.front();
    return values_[static_cast<std::size_t>(std::min<Index>(k, Index(values_.size()) - 1))];
  }

  bool is_constant() const { return constant_; }

private:
  std::vector<Scalar> values_{Scalar(1)};
  bool constant_ = true;
};

enum class RunStatus { converged, max_iters };

inline const char* to_string(RunStatus s) { return s == RunStatus::converged ? "converged" : "max_iters"; }

template <typename Scalar = double>
struct IterationRecord {
  Index k = 0;
  /// |u_k - T u_k| (PPP) or |w_k - T~ w_k| (rPPP).
  Scalar residual = 0;
  /// max(|w_k - C^T u_k|, |T u_k - (M+A)^{-1} C w_k|); zero unless monitored.
  Scalar intertwine_violation = 0;
  std::optional<VectorX<Scalar>> u;
  std::optional<VectorX<Scalar>> w;
};

template <typename Scalar = double>
struct IterationTrace {
  std::vector<IterationRecord<Scalar>> records;
  RunStatus status = RunStatus::max_iters;
  /// Index of the last iterate examined.
  Index last_k = 0;
  /// Last iterate (u_k for PPP, w_k for rPPP).
  VectorX<Scalar> final_point;
  /// H-space shadow of the last iterate: T u_k, or (M+A)^{-1} C w_k for rPPP.
  VectorX<Scalar> final_shadow;
  Scalar max_intertwine_violation = 0;

  bool converged() const { return status == RunStatus::converged; }
};

template <typename Scalar = double>
struct RunOptions {
  Index max_iters = 100000;
  Scalar eps = Scalar(1e-10);
  /// Keep u_k / w_k in the records.
  bool store_iterates = false;
  /// Run the partner sequence alongside and record the intertwining violation.
  bool monitor_intertwining = false;
  /// Record every `record_stride`-th iteration (the last one is always kept).
  Index record_stride = 1;
};

namespace detail {

template <typename Scalar>
void validate_run(const RunOptions<Scalar>& opt) {
  if (!(opt.eps > Scalar(0))) throw InvalidConfig("run: eps must be positive");
  if (opt.max_iters < 0) throw InvalidConfig("run: max_iters must be nonnegative");
  if (opt.record_stride < 1) throw InvalidConfig("run: record_stride must be >= 1");
}

template <typename Scalar>
void push_record(IterationTrace<Scalar>& trace, const RunOptions<Scalar>& opt, bool last,
                 IterationRecord<Scalar>&& rec) {
  if (rec.k % opt.record_stride == 0 || last) trace.records.push_back(std::move(rec));
}

}  // namespace detail

/// PPP on H. Stops once |u_k - T u_k| <= eps or after max_iters updates.
template <typename Scalar>
IterationTrace<Scalar> run_ppp(const PPPInstance<Scalar>& inst, const VectorX<Scalar>& u0,
                               const LambdaSchedule<Scalar>& sched, const RunOptions<Scalar>& opt) {
  detail::require_dims(u0.size() == inst.dim_H(), "run_ppp");
  detail::validate_run(opt);
  IterationTrace<Scalar> trace;
  VectorX<Scalar> u = u0;
  VectorX<Scalar> w;
  if (opt.monitor_intertwining) w = inst.apply_Ct(u0);
  for (Index k = 0;; ++k) {
    const VectorX<Scalar> tu = apply_T(inst, u);
    const Scalar residual = (u - tu).norm();
    IterationRecord<Scalar> rec;
    rec.k = k;
    rec.residual = residual;
    VectorX<Scalar> ttw;
    if (opt.monitor_intertwining) {
      const VectorX<Scalar> shadow = inst.resolvent_MA(inst.apply_C(w));
      rec.intertwine_violation = std::max((w - inst.apply_Ct(u)).norm(), (tu - shadow).norm());
      trace.max_intertwine_violation = std::max(trace.max_intertwine_violation, rec.intertwine_violation);
      ttw = inst.apply_Ct(shadow);
    }
    if (opt.store_iterates) {
      rec.u = u;
      if (opt.monitor_intertwining) rec.w = w;
    }
    const bool done = residual <= opt.eps;
    const bool out_of_budget = k >= opt.max_iters;
    detail::push_record(trace, opt, done || out_of_budget, std::move(rec));
    if (done || out_of_budget) {
      trace.status = done ? RunStatus::converged : RunStatus::max_iters;
      trace.last_k = k;
      trace.final_point = u;
      trace.final_shadow = tu;
      return trace;
    }
    const Scalar lambda = sched.at(k);
    u = (Scalar(1) - lambda) * u + lambda * tu;
    if (opt.monitor_intertwining) w = (Scalar(1) - lambda) * w + lambda * ttw;
  }
}

template <typename Scalar>
IterationTrace<Scalar> run_ppp(const PPPInstance<Scalar>& inst, const VectorX<Scalar>& u0,
                               const LambdaSchedule<Scalar>& sched, Index max_iters,
                               Scalar eps = Scalar(1e-10)) {
  RunOptions<Scalar> opt;
  opt.max_iters = max_iters;
  opt.eps = eps;
  return run_ppp(inst, u0, sched, opt);
}

/// rPPP on D. Stops once |w_k - T~ w_k| <= eps or after max_iters updates.
template <typename Scalar>
IterationTrace<Scalar> run_rppp(const PPPInstance<Scalar>& inst, const VectorX<Scalar>& w0,
                                const LambdaSchedule<Scalar>& sched, const RunOptions<Scalar>& opt) {
  detail::require_dims(w0.size() == inst.dim_D(), "run_rppp");
  detail::validate_run(opt);
  if (opt.monitor_intertwining)
    throw InvalidConfig("run_rppp: intertwining needs u_0; use run_ppp or run_lockstep");
  IterationTrace<Scalar> trace;
  VectorX<Scalar> w = w0;
  for (Index k = 0;; ++k) {
    const VectorX<Scalar> shadow = inst.resolvent_MA(inst.apply_C(w));
    const VectorX<Scalar> tw = inst.apply_Ct(shadow);
    const Scalar residual = (w - tw).norm();
    IterationRecord<Scalar> rec;
    rec.k = k;
    rec.residual = residual;
    if (opt.store_iterates) rec.w = w;
    const bool done = residual <= opt.eps;
    const bool out_of_budget = k >= opt.max_iters;
    detail::push_record(trace, opt, done || out_of_budget, std::move(rec));
    if (done || out_of_budget) {
      trace.status = done ? RunStatus::converged : RunStatus::max_iters;
      trace.last_k = k;
      trace.final_point = w;
      trace.final_shadow = shadow;
      return trace;
    }
    const Scalar lambda = sched.at(k);
    w = (Scalar(1) - lambda) * w + lambda * tw;
  }
}

template <typename Scalar>
IterationTrace<Scalar> run_rppp(const PPPInstance<Scalar>& inst, const VectorX<Scalar>& w0,
                                const LambdaSchedule<Scalar>& sched, Index max_iters,
                                Scalar eps = Scalar(1e-10)) {
  RunOptions<Scalar> opt;
  opt.max_iters = max_iters;
  opt.eps = eps;
  return run_rppp(inst, w0, sched, opt);
}

/// One step of a lockstep PPP/rPPP run, as seen by an observer.
template <typename Scalar>
struct LockstepState {
  Index k;
  const VectorX<Scalar>& u;
  const VectorX<Scalar>& Tu;
  const VectorX<Scalar>& w;
  /// (M+A)^{-1} C w_k.
  const VectorX<Scalar>& shadow;
  Scalar residual_u;
  Scalar residual_w;
  Scalar violation;
};

template <typename Scalar>
struct LockstepSummary {
  Index last_k = 0;
  RunStatus status = RunStatus::max_iters;
  VectorX<Scalar> u, Tu, w, shadow;
  Scalar max_violation = 0;
};

/// PPP from u_0 and rPPP from w_0 = C^T u_0 advanced independently in
/// lockstep. Stops when |w_k - T~ w_k| <= eps or after max_iters updates.
/// `observer(const LockstepState&)` is called for every k.
template <typename Scalar, typename Observer>
LockstepSummary<Scalar> run_lockstep(const PPPInstance<Scalar>& inst, const VectorX<Scalar>& u0,
                                     const LambdaSchedule<Scalar>& sched, Index max_iters, Scalar eps,
                                     Observer&& observer) {
  detail::require_dims(u0.size() == inst.dim_H(), "run_lockstep");
  if (max_iters < 0) throw InvalidConfig("run_lockstep: max_iters must be nonnegative");
  if (eps < Scalar(0)) throw InvalidConfig("run_lockstep: eps must be nonnegative");
  LockstepSummary<Scalar> out;
  VectorX<Scalar> u = u0;
  VectorX<Scalar> w = inst.apply_Ct(u0);
  for (Index k = 0;; ++k) {
    const VectorX<Scalar> tu = apply_T(inst, u);
    const VectorX<Scalar> shadow = inst.resolvent_MA(inst.apply_C(w));
    const VectorX<Scalar> tw = inst.apply_Ct(shadow);
    const Scalar viol = std::max((w - inst.apply_Ct(u)).norm(), (tu - shadow).norm());
    const Scalar res_w = (w - tw).norm();
    out.max_violation = std::max(out.max_violation, viol);
    observer(LockstepState<Scalar>{k, u, tu, w, shadow, (u - tu).norm(), res_w, viol});
    const bool done = res_w <= eps;
    if (done || k >= max_iters) {
      out.last_k = k;
      out.status = done ? RunStatus::converged : RunStatus::max_iters;
      out.u = u;
      out.Tu = tu;
      out.w = w;
      out.shadow = shadow;
      return out;
    }
    const Scalar lambda = sched.at(k);
    u = (Scalar(1) - lambda) * u + lambda * tu;
    w = (Scalar(1) - lambda) * w + lambda * tw;
  }
}

/// Largest intertwining violation over n_iters lockstep iterations.
template <typename Scalar>
Scalar check_intertwining(const PPPInstance<Scalar>& inst, const VectorX<Scalar>& u0,
                          const LambdaSchedule<Scalar>& sched, Index n_iters) {
  // eps = 0 keeps the run going unless w_k is an exact fixed point.
  auto summary = run_lockstep(inst, u0, sched, n_iters, Scalar(0), [](const auto&) {});
  return summary.max_violation;
}

/// Sampled Lipschitz ratio max |F(x)-F(y)| / |x-y| of (M+A)^{-1}.
template <typename Scalar>
Scalar estimate_lipschitz(const PPPInstance<Scalar>& inst, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  auto draw = [&] {
    VectorX<Scalar> v(inst.dim_H());
    for (Index i = 0; i < v.size(); ++i) v(i) = Scalar(nd(rng));
    return v;
  };
  Scalar ratio = 0;
  for (int s = 0; s < samples; ++s) {
    const VectorX<Scalar> x = draw(), y = draw();
    const Scalar den = (x - y).norm();
    if (den == Scalar(0)) continue;
    ratio = std::max(ratio, (inst.resolvent_MA(x) - inst.resolvent_MA(y)).norm() / den);
  }
  return ratio;
}

}  // namespace ppp
