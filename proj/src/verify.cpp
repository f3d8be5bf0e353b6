#include <algorithm>
#include <cmath>
#include <functional>

#include "ppp/commands.hpp"
#include "ppp/limits.hpp"
#include "ppp/random.hpp"

namespace ppp::cli {

namespace {

using Checks = std::vector<VerifyCheck>;

void add(Checks& out, const std::string& suite, const std::string& name, double value, double tol) {
  out.push_back(VerifyCheck{suite, name, value, tol, std::isfinite(value) && value <= tol});
}

Index draw_rank(Rng& rng, Index d) { return std::uniform_int_distribution<Index>(0, d)(rng); }

struct SubspaceCase {
  std::string method;
  PPPInstance<double> inst;
  Subspace<double> fix_T, fix_Ttilde;
  /// w* and u* from u0.
  std::function<LimitPrediction<double>(const Vector&)> predict;
};

std::vector<SubspaceCase> subspace_cases(Rng& rng) {
  std::vector<SubspaceCase> out;
  const Index d = 4;
  auto sub = [&] { return random_subspace(rng, d, draw_rank(rng, d)); };
  {
    const auto u1 = sub(), u2 = sub();
    auto inst = build_dr(ResolventOp<double>::normal_cone(u1), ResolventOp<double>::normal_cone(u2));
    const auto fix = dr_fix_and_limits(u1, u2, Vector(Vector::Zero(2 * d))).fix;
    out.push_back({"dr", inst, fix.fix_T, fix.fix_Ttilde,
                   [=](const Vector& u0) { return dr_fix_and_limits(u1, u2, u0).limit; }});
  }
  {
    const Index m = 3;
    const auto u = sub();
    const auto v = random_subspace(rng, m, draw_rank(rng, m));
    const Matrix l = random_matrix_with_norm(rng, m, d, 1.0);
    const double sigma = 0.8, tau = 1.1;
    auto inst = build_cp(ResolventOp<double>::normal_cone(u), ResolventOp<double>::normal_cone(v), l, sigma, tau);
    const auto fix = cp_fix_and_limits(u, v, l, sigma, tau, Vector(Vector::Zero(d + m))).fix;
    out.push_back({"cp", inst, fix.fix_T, fix.fix_Ttilde,
                   [=](const Vector& u0) { return cp_fix_and_limits(u, v, l, sigma, tau, u0).limit; }});
  }
  {
    const auto u1 = sub(), u2 = sub(), u3 = sub();
    auto inst = build_ryu(ResolventOp<double>::normal_cone(u1), ResolventOp<double>::normal_cone(u2),
                          ResolventOp<double>::normal_cone(u3));
    const auto fix = ryu_fix_and_projection(u1, u2, u3, Vector(Vector::Zero(5 * d))).fix;
    out.push_back({"ryu", inst, fix.fix_T, fix.fix_Ttilde, [=](const Vector& u0) {
                     const auto r = ryu_fix_and_projection(u1, u2, u3, u0);
                     return LimitPrediction<double>{r.w_star, r.m_projection};
                   }});
  }
  {
    std::vector<Subspace<double>> us;
    std::vector<ResolventOp<double>> ops;
    for (int i = 0; i < 4; ++i) {
      us.push_back(sub());
      ops.push_back(ResolventOp<double>::normal_cone(us.back()));
    }
    auto inst = build_mt(ops);
    const auto fix = mt_fix_and_projection(us, Vector(Vector::Zero(7 * d))).fix;
    out.push_back({"mt", inst, fix.fix_T, fix.fix_Ttilde, [=](const Vector& u0) {
                     const auto r = mt_fix_and_projection(us, u0);
                     return LimitPrediction<double>{r.w_star, r.m_projection};
                   }});
  }
  return out;
}

Checks suite_linalg(Rng& rng) {
  Checks out;
  const char* s = "linalg";
  double idem = 0, comp = 0, inter = 0, sqrt_err = 0, chol_err = 0;
  for (int t = 0; t < 10; ++t) {
    const Index d = 6;
    const auto u = random_subspace(rng, d, draw_rank(rng, d));
    const auto v = random_subspace(rng, d, draw_rank(rng, d));
    const Matrix p = u.projector();
    idem = std::max(idem, (p * p - p).norm() + (p - p.transpose()).norm());
    comp = std::max(comp, (p + complement(u).projector() - Matrix::Identity(d, d)).norm());
    const auto w = intersect(u, v);
    inter = std::max(inter, containment_residual(w, u) + containment_residual(w, v));
    const Matrix g = gaussian_matrix(rng, d, 3);
    const Matrix psd = g * g.transpose();
    const Matrix r = principal_sqrt(psd);
    sqrt_err = std::max(sqrt_err, (r * r - psd).norm() / std::max(1.0, psd.norm()));
    const Matrix c = cholesky(psd);
    chol_err = std::max(chol_err, (c * c.transpose() - psd).norm() / std::max(1.0, psd.norm()));
  }
  add(out, s, "projector_idempotent_symmetric", idem, 1e-12);
  add(out, s, "complement_sums_to_identity", comp, 1e-12);
  add(out, s, "intersection_contained", inter, 1e-10);
  add(out, s, "principal_sqrt_squares_back", sqrt_err, 1e-10);
  add(out, s, "cholesky_semidefinite_reconstruction", chol_err, 1e-10);
  Matrix rot(2, 2);
  rot << 0.0, -0.5, 0.5, 0.0;
  add(out, s, "spectral_radius_scaled_rotation", std::abs(spectral_radius(rot) - 0.5), 1e-12);
  return out;
}

Checks suite_monotone(Rng& rng) {
  Checks out;
  const char* s = "monotone";
  double firm = 0, moreau = 0;
  const Index d = 5;
  std::vector<ResolventOp<double>> ops = {ResolventOp<double>::zero(d),
                                          ResolventOp<double>::normal_cone(random_subspace(rng, d, 2)),
                                          ResolventOp<double>::normal_cone_point(gaussian_vector(rng, d))};
  Matrix b = gaussian_matrix(rng, d, d);
  b = Matrix(b - b.transpose()) + 0.3 * Matrix::Identity(d, d);
  ops.push_back(ResolventOp<double>::linear_monotone(b));
  for (const auto& op : ops)
    for (int t = 0; t < 20; ++t) {
      const Vector x = gaussian_vector(rng, d), y = gaussian_vector(rng, d);
      const Vector jx = resolvent(op, x), jy = resolvent(op, y);
      firm = std::max(firm, (jx - jy).squaredNorm() - (x - y).dot(jx - jy));
      moreau = std::max(moreau, (jx + inverse_resolvent(op, 1.0, x) - x).norm());
    }
  add(out, s, "resolvent_firmly_nonexpansive", firm, 1e-12);
  add(out, s, "moreau_decomposition", moreau, 1e-12);
  return out;
}

Checks suite_core(Rng& rng) {
  Checks out;
  const char* s = "core";
  for (auto& c : subspace_cases(rng)) {
    const auto sched = LambdaSchedule<double>::constant(1.3);
    const Vector u0 = gaussian_vector(rng, c.inst.dim_H());
    add(out, s, c.method + "_intertwining_200", check_intertwining(c.inst, u0, sched, 200), 1e-9);
    double firm = 0;
    for (int t = 0; t < 10; ++t) {
      const Vector x = gaussian_vector(rng, c.inst.dim_H()), y = gaussian_vector(rng, c.inst.dim_H());
      const Vector dt = apply_T(c.inst, x) - apply_T(c.inst, y);
      firm = std::max(firm, seminorm_M(c.inst, dt) * seminorm_M(c.inst, dt) - dt.dot(c.inst.apply_M(x - y)));
    }
    add(out, s, c.method + "_T_firmly_nonexpansive_in_M", firm, 1e-10);
  }
  return out;
}

Checks suite_methods(Rng& rng) {
  Checks out;
  const char* s = "methods";
  for (auto& c : subspace_cases(rng)) {
    const Matrix m = c.inst.M();
    double diff = 0;
    for (int t = 0; t < 5; ++t) {
      const Vector u = gaussian_vector(rng, c.inst.dim_H());
      diff = std::max(diff, (c.inst.apply_M(u) - m * u).norm());
    }
    add(out, s, c.method + "_apply_M_matches_CCt", diff, 1e-10);
    const Matrix t = assemble_T(c.inst);
    add(out, s, c.method + "_Fix_T_closed_form", subspace_distance(fix_subspace_oracle(t), c.fix_T), 1e-8);
  }
  return out;
}

Checks suite_limits(Rng& rng) {
  Checks out;
  const char* s = "limits";
  for (auto& c : subspace_cases(rng)) {
    add(out, s, c.method + "_fix_correspondence", fix_correspondence_residual(c.inst, c.fix_T, c.fix_Ttilde), 1e-9);
    const Vector u0 = gaussian_vector(rng, c.inst.dim_H());
    const auto pred = c.predict(u0);
    const auto oracle = m_projection_oracle(c.inst, c.fix_T, u0);
    add(out, s, c.method + "_m_projection_oracle", (oracle.point - pred.u_star).norm(), 1e-8);
    auto run = run_lockstep(c.inst, u0, LambdaSchedule<double>::constant(1.0), Index(100000), 1e-12,
                            [](const auto&) {});
    add(out, s, c.method + "_run_limit_w", (run.w - pred.w_star).norm(), 1e-6);
    add(out, s, c.method + "_run_limit_Tu", (run.Tu - pred.u_star).norm(), 1e-6);
  }
  return out;
}

Checks suite_analysis(Rng& rng) {
  Checks out;
  const char* s = "analysis";
  double rho = 0, nrm = 0;
  for (int i = 0; i < 12; ++i)
    for (double tau : {0.5, 1.0, 2.0}) {
      const auto r = two_lines_report(i * std::acos(-1.0) / 12, tau);
      rho = std::max(rho, std::abs(r.rho_numeric - r.rho_closed));
      nrm = std::max(nrm, std::abs(r.norm_numeric - r.norm_closed));
    }
  add(out, s, "two_lines_spectral_radius", rho, 1e-9);
  add(out, s, "two_lines_operator_norm", nrm, 1e-9);
  double chol = 0, polar = 0, agree = 0, trig = 0;
  for (int t = 0; t < 10; ++t) {
    const Index m = 1 + Index(rng() % 5), n = 1 + Index(rng() % 5);
    const Matrix l = random_matrix_with_norm(rng, m, n, 0.9);
    chol = std::max(chol, factor_cholesky(l, 1.0, 0.9).reconstruction_error);
    const auto p = factor_sqrt_polar(l, 1.0);
    polar = std::max(polar, p.reconstruction_error);
    agree = std::max(agree, (p.C - principal_sqrt(cp_preconditioner(l, 1.0, 1.0))).norm());
    trig = std::max(trig, trig_form_check(l, 1e-9).difference);
  }
  add(out, s, "cholesky_reconstruction", chol, 1e-9);
  add(out, s, "polar_sqrt_reconstruction", polar, 1e-8);
  add(out, s, "polar_matches_principal_sqrt", agree, 1e-8);
  add(out, s, "trig_form", trig, 1e-9);
  return out;
}

using SuiteFn = Checks (*)(Rng&);

const std::vector<std::pair<std::string, SuiteFn>>& registry() {
  static const std::vector<std::pair<std::string, SuiteFn>> suites = {
      {"linalg", suite_linalg}, {"monotone", suite_monotone}, {"core", suite_core},
      {"methods", suite_methods}, {"limits", suite_limits}, {"analysis", suite_analysis}};
  return suites;
}

}  // namespace

std::vector<std::string> verify_suites() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : registry()) names.push_back(name);
  names.push_back("all");
  return names;
}

std::vector<VerifyCheck> run_verify_suite(const std::string& suite, std::uint64_t seed) {
  Checks out;
  bool found = false;
  for (const auto& [name, fn] : registry()) {
    if (suite != "all" && suite != name) continue;
    found = true;
    Rng rng(seed);
    auto part = fn(rng);
    out.insert(out.end(), part.begin(), part.end());
  }
  if (!found) throw InvalidConfig("verify: unknown suite '" + suite + "'");
  return out;
}

}  // namespace ppp::cli
