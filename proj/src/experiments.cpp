#include "ppp/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "ppp/methods.hpp"
#include "ppp/monotone_ops.hpp"

namespace ppp {

namespace {

/// Cell-intersection lengths of the line {origin + t·dir} with the unit grid [0, n]².
void trace_ray(int n, double ox, double oy, double dx, double dy, Vector& row) {
  std::vector<double> ts;
  const double big = 1e300;
  double tmin = -big, tmax = big;
  auto clip = [&](double o, double d) {
    if (std::abs(d) < 1e-14) {
      if (o < 0.0 || o > n) tmin = big;
      return;
    }
    double t0 = (0.0 - o) / d, t1 = (n - o) / d;
    if (t0 > t1) std::swap(t0, t1);
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
  };
  clip(ox, dx);
  clip(oy, dy);
  if (!(tmin < tmax)) return;
  ts.push_back(tmin);
  ts.push_back(tmax);
  for (int k = 0; k <= n; ++k) {
    if (std::abs(dx) >= 1e-14) {
      const double t = (k - ox) / dx;
      if (t > tmin && t < tmax) ts.push_back(t);
    }
    if (std::abs(dy) >= 1e-14) {
      const double t = (k - oy) / dy;
      if (t > tmin && t < tmax) ts.push_back(t);
    }
  }
  std::sort(ts.begin(), ts.end());
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const double len = ts[i + 1] - ts[i];
    if (len <= 1e-12) continue;
    const double tm = 0.5 * (ts[i] + ts[i + 1]);
    const int c = std::clamp(static_cast<int>(std::floor(ox + tm * dx)), 0, n - 1);
    const int r = std::clamp(static_cast<int>(std::floor(oy + tm * dy)), 0, n - 1);
    row(r * n + c) += len;
  }
}

}  // namespace

std::vector<double> uniform_angles(int count) {
  if (count < 1) throw InvalidConfig("uniform_angles: count must be positive");
  std::vector<double> out;
  for (int k = 0; k < count; ++k) out.push_back(k * std::numbers::pi / count);
  return out;
}

PhantomProblem make_phantom(int grid_side, const std::vector<double>& angles, int rays_per_angle,
                            std::uint64_t seed) {
  if (grid_side < 8) throw InvalidConfig("make_phantom: grid_side must be at least 8");
  if (angles.empty() || rays_per_angle < 1) throw InvalidConfig("make_phantom: need at least one angle and one ray");
  const int n = grid_side;
  const double half = 0.5 * n;

  PhantomProblem p;
  p.grid_side = n;
  p.angles = angles;
  p.rays_per_angle = rays_per_angle;
  p.L = Matrix::Zero(Index(angles.size()) * rays_per_angle, Index(n) * n);
  Index row = 0;
  for (double theta : angles) {
    const double dx = std::cos(theta), dy = std::sin(theta);
    for (int j = 0; j < rays_per_angle; ++j, ++row) {
      const double s = -half + (j + 0.5) * n / rays_per_angle;
      Vector ray = Vector::Zero(Index(n) * n);
      trace_ray(n, half - s * dy, half + s * dx, dx, dy, ray);
      p.L.row(row) = ray.transpose();
    }
  }
  if (p.L.cwiseAbs().maxCoeff() == 0.0) throw InvalidConfig("make_phantom: no ray meets the grid");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  const double cx = half + 0.04 * n * jitter(rng), cy = half + 0.04 * n * jitter(rng);
  const double rot = 0.3 * jitter(rng);
  const double ax = (half - 2.5) * (0.85 + 0.1 * jitter(rng)), ay = 0.42 * n * (0.9 + 0.05 * jitter(rng));
  const double ix = 0.45 * ax, iy = 0.4 * ay;
  const double icx = cx + 0.15 * ax * jitter(rng), icy = cy + 0.15 * ay * jitter(rng);
  auto inside = [&](double x, double y, double ex, double ey, double a, double b) {
    const double u = (x - ex) * std::cos(rot) + (y - ey) * std::sin(rot);
    const double v = -(x - ex) * std::sin(rot) + (y - ey) * std::cos(rot);
    return (u * u) / (a * a) + (v * v) / (b * b) <= 1.0;
  };
  p.x_true = Vector::Zero(Index(n) * n);
  std::vector<Index> free;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const bool border = c < 2 || c >= n - 2;
      if (!border) free.push_back(Index(r) * n + c);
      if (border) continue;
      const double x = c + 0.5, y = r + 0.5;
      double v = 0.0;
      if (inside(x, y, cx, cy, ax, ay)) v = 1.0;
      if (inside(x, y, icx, icy, ix, iy)) v = 2.0;
      p.x_true(Index(r) * n + c) = v;
    }
  p.U = Subspace<double>::coordinate(Index(n) * n, free);
  p.b = p.L * p.x_true;
  return p;
}

ExperimentReport run_phantom(const PhantomProblem& p, Index iters, double lambda, Index record_stride) {
  if (iters < 0) throw InvalidConfig("run_phantom: iters must be nonnegative");
  if (record_stride < 1) throw InvalidConfig("run_phantom: record_stride must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  const Matrix ltl = p.L.transpose() * p.L;
  const double lnorm = std::sqrt(operator_norm(ltl));
  const double sigma = 0.99 / lnorm, tau = 0.99 / lnorm;
  const Index n = p.L.cols(), m = p.L.rows();

  auto inst = build_cp(ResolventOp<double>::normal_cone(p.U), ResolventOp<double>::normal_cone_point(p.b), p.L,
                       sigma, tau);
  const Vector u0 = Vector::Zero(n + m);
  const auto prediction = cp_affine_limits(p.U, p.b, p.L, sigma, tau, u0, /*with_reduced=*/false);
  const Vector x_pred = prediction.limit.u_star.head(n);
  const auto sched = LambdaSchedule<double>::constant(lambda);

  ExperimentReport rep;
  rep.sigma = sigma;
  rep.tau = tau;
  rep.predicted = x_pred;
  Vector u = u0;
  for (Index k = 0;; ++k) {
    const Vector tu = apply_T(inst, u);
    // The first block of T u is P_U(x_k - σ L^T y_k).
    const Vector shadow = tu.head(n);
    const double err = (shadow - x_pred).norm();
    const bool last = k >= iters;
    if (k % record_stride == 0 || last) {
      TraceRow row;
      row.k = k;
      row.residual = (u - tu).norm();
      row.u_err = err;
      rep.history.push_back(row);
    }
    if (!rep.first_k_below && err <= 1e-6) rep.first_k_below = k;
    if (last) {
      rep.iterations = k;
      rep.final_error = err;
      rep.final_image = shadow;
      break;
    }
    u = (1.0 - sched.at(k)) * u + sched.at(k) * tu;
  }
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

ExperimentReport convergence_study(const PPPInstance<double>& inst, const Vector& u0,
                                   const LambdaSchedule<double>& sched, Index iters,
                                   const LimitPrediction<double>& reference, Index record_stride) {
  detail::require_dims(reference.w_star.size() == inst.dim_D() && reference.u_star.size() == inst.dim_H(),
                       "convergence_study");
  if (record_stride < 1) throw InvalidConfig("convergence_study: record_stride must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport rep;
  double last_err = 0;
  auto summary = run_lockstep(inst, u0, sched, iters, 0.0, [&](const LockstepState<double>& s) {
    const double w_err = (s.w - reference.w_star).norm();
    const double u_err = (s.Tu - reference.u_star).norm();
    last_err = std::max(w_err, u_err);
    if (!rep.first_k_below && last_err <= 1e-6) rep.first_k_below = s.k;
    if (s.k % record_stride == 0 || s.k == iters)
      rep.history.push_back(TraceRow{s.k, s.residual_w, w_err, u_err, s.violation});
  });
  if (rep.history.empty() || rep.history.back().k != summary.last_k) {
    const double w_err = (summary.w - reference.w_star).norm();
    const double u_err = (summary.Tu - reference.u_star).norm();
    rep.history.push_back(TraceRow{summary.last_k, (summary.w - inst.apply_Ct(summary.shadow)).norm(), w_err, u_err,
                                   summary.max_violation});
  }
  rep.iterations = summary.last_k;
  rep.final_error = last_err;
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace ppp
