#include "ppp/commands.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "ppp/io.hpp"
#include "ppp/limits.hpp"
#include "ppp/random.hpp"

namespace ppp::cli {

namespace {

constexpr Index kMaxAssembleDim = 400;

nlohmann::json limit_json(const Vector& w, const Vector& u, const char* u_key) {
  return {{"w_star", io::to_json(w)}, {u_key, io::to_json(u)}};
}

std::optional<LimitPrediction<double>> predict(const ExperimentConfig& cfg, const RealizedProblem& prob,
                                               const PPPInstance<double>& inst) {
  bool all_subspaces = true;
  for (const auto& s : prob.subspaces) all_subspaces = all_subspaces && s.has_value();
  const auto& subs = prob.subspaces;
  const auto& desc = prob.descriptor;
  auto from_w = [&](const Vector& w) {
    return LimitPrediction<double>{w, inst.resolvent_MA(inst.apply_C(w))};
  };
  if (all_subspaces) {
    switch (cfg.method) {
      case MethodFamily::dr: return dr_fix_and_limits(*subs[0], *subs[1], prob.u0).limit;
      case MethodFamily::cp:
        return cp_fix_and_limits(*subs[0], *subs[1], *desc.L, desc.sigma, desc.tau, prob.u0).limit;
      case MethodFamily::ryu: return from_w(ryu_fix_and_projection(*subs[0], *subs[1], *subs[2], prob.u0).w_star);
      case MethodFamily::mt: {
        std::vector<Subspace<double>> us;
        for (const auto& s : subs) us.push_back(*s);
        return from_w(mt_fix_and_projection(us, prob.u0).w_star);
      }
    }
  }
  if (cfg.method == MethodFamily::cp && subs[0] && prob.points[1])
    return cp_affine_limits(*subs[0], *prob.points[1], *desc.L, desc.sigma, desc.tau, prob.u0).limit;
  return std::nullopt;
}

std::pair<Index, Index> parse_shape(const std::string& text, const std::string& spec) {
  const auto x = text.find('x');
  try {
    std::size_t used = 0;
    if (x == std::string::npos) {
      const long n = std::stol(text, &used);
      if (used != text.size() || n < 1) throw InvalidConfig("");
      return {n, n};
    }
    const std::string a = text.substr(0, x), b = text.substr(x + 1);
    const long m = std::stol(a, &used);
    if (used != a.size()) throw InvalidConfig("");
    const long n = std::stol(b, &used);
    if (used != b.size() || m < 1 || n < 1) throw InvalidConfig("");
    return {m, n};
  } catch (const std::exception&) {
    throw InvalidConfig("L: malformed shape in '" + spec + "' (expected MxN)");
  }
}

Matrix parse_l_spec(const std::string& spec, double l_norm, std::uint64_t seed) {
  if (!spec.empty() && spec.front() == '[') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(spec);
    } catch (const nlohmann::json::parse_error&) {
      throw InvalidConfig("L: malformed matrix '" + spec + "'");
    }
    if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty())
      throw InvalidConfig("L: expected a nonempty array of rows");
    Matrix l(Index(j.size()), Index(j[0].size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (!j[i].is_array() || j[i].size() != j[0].size()) throw InvalidConfig("L: rows must have equal length");
      for (std::size_t c = 0; c < j[i].size(); ++c) {
        if (!j[i][c].is_number()) throw InvalidConfig("L: entries must be numbers");
        l(Index(i), Index(c)) = j[i][c].get<double>();
      }
    }
    return l;
  }
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  if (colon == std::string::npos) throw InvalidConfig("L: expected a matrix, zero:MxN, identity:N or random:MxN");
  const auto [m, n] = parse_shape(spec.substr(colon + 1), spec);
  if (kind == "zero") return Matrix::Zero(m, n);
  if (kind == "identity") {
    if (m != n) throw InvalidConfig("L: identity must be square");
    return Matrix::Identity(m, n);
  }
  if (kind == "random") {
    Rng rng(seed);
    return random_matrix_with_norm(rng, m, n, l_norm);
  }
  throw InvalidConfig("L: unknown kind '" + kind + "'");
}

}  // namespace

int report_exception(std::ostream& err) {
  try {
    throw;
  } catch (const Infeasible& e) {
    err << "infeasible: " << e.what() << " (residual " << io::format_number(e.residual()) << ")\n";
    return exit_infeasible;
  } catch (const InvalidConfig& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const InvalidInput& e) {
    err << "invalid input: " << e.what() << '\n';
    return exit_config;
  } catch (const nlohmann::json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return exit_numeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_numeric;
  }
}

void apply_overrides(ExperimentConfig& cfg, const RunOverrides& o) {
  if (o.seed) cfg.seed = *o.seed;
  if (o.iters) {
    if (*o.iters < 0) throw InvalidConfig("--iters: must be nonnegative");
    cfg.iters = *o.iters;
  }
  if (o.lambda) {
    if (!(*o.lambda > 0 && *o.lambda < 2)) throw InvalidConfig("--lambda: must lie in (0,2)");
    cfg.lambda = *o.lambda;
  }
  if (o.eps) {
    if (!(*o.eps > 0)) throw InvalidConfig("--eps: must be positive");
    cfg.eps = *o.eps;
  }
  if (o.stride) {
    if (*o.stride < 1) throw InvalidConfig("--stride: must be >= 1");
    cfg.stride = *o.stride;
  }
}

RunOutcome run_experiment(const ExperimentConfig& cfg) {
  const RealizedProblem prob = realize(cfg);
  const PPPInstance<double> inst = prob.descriptor.build();
  const auto pred = predict(cfg, prob, inst);
  const auto sched = LambdaSchedule<double>::constant(cfg.lambda);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  RunOutcome out;
  auto summary = run_lockstep(inst, prob.u0, sched, cfg.iters, cfg.eps, [&](const LockstepState<double>& s) {
    const bool last = s.residual_w <= cfg.eps || s.k >= cfg.iters;
    if (s.k % cfg.stride != 0 && !last) return;
    TraceRow row{s.k, s.residual_w, nan, nan, s.violation};
    if (pred) {
      row.w_err = (s.w - pred->w_star).norm();
      row.u_err = (s.Tu - pred->u_star).norm();
    }
    out.trace.push_back(row);
  });
  if (!summary.w.allFinite() || !summary.Tu.allFinite())
    throw NumericalFailure("run: iterates became non-finite");

  bool linear = true;
  for (const auto& p : prob.points) linear = linear && !p;
  nlohmann::json rho = nullptr;
  if (linear && inst.dim_H() <= kMaxAssembleDim) {
    try {
      rho = spectral_radius(assemble_T(inst));
    } catch (const NumericalFailure&) {
      rho = nullptr;
    }
  }

  nlohmann::json& j = out.summary;
  j["method"] = to_string(cfg.method);
  j["dims"] = {{"H", inst.dim_H()}, {"D", inst.dim_D()}, {"space", cfg.dim}, {"operators", cfg.ops.size()}};
  j["seed"] = cfg.seed;
  j["lambda"] = cfg.lambda;
  j["eps"] = cfg.eps;
  j["iterations"] = summary.last_k;
  j["converged"] = summary.status == RunStatus::converged;
  j["status"] = to_string(summary.status);
  j["predicted_limit"] = pred ? limit_json(pred->w_star, pred->u_star, "u_star") : nlohmann::json(nullptr);
  j["achieved_limit"] = {{"w", io::to_json(summary.w)}, {"Tu", io::to_json(summary.Tu)}};
  if (pred)
    j["limit_error"] = {{"w", (summary.w - pred->w_star).norm()}, {"Tu", (summary.Tu - pred->u_star).norm()}};
  else
    j["limit_error"] = nullptr;
  j["max_intertwine_violation"] = summary.max_violation;
  j["rho"] = rho;
  return out;
}

int cmd_run(const std::filesystem::path& config, const std::filesystem::path& out_dir, const RunOverrides& overrides,
            std::ostream& out, std::ostream& err) {
  try {
    ExperimentConfig cfg = load_config(config);
    apply_overrides(cfg, overrides);
    const RunOutcome r = run_experiment(cfg);
    io::ensure_dir(out_dir);
    io::write_trace_csv(out_dir / "trace.csv", r.trace);
    io::write_json(out_dir / "summary.json", r.summary);
    out << r.summary["method"].get<std::string>() << ": " << r.summary["status"].get<std::string>() << " after "
        << r.summary["iterations"] << " iterations";
    if (!r.summary["limit_error"].is_null())
      out << ", limit error w " << io::format_number(r.summary["limit_error"]["w"].get<double>()) << ", Tu "
          << io::format_number(r.summary["limit_error"]["Tu"].get<double>());
    out << ", max intertwining violation "
        << io::format_number(r.summary["max_intertwine_violation"].get<double>()) << '\n';
    return exit_ok;
  } catch (...) {
    return report_exception(err);
  }
}

int cmd_spectrum(const std::vector<double>& thetas, const std::vector<double>& taus, std::ostream& out,
                 std::ostream& err) {
  try {
    if (thetas.empty() || taus.empty()) throw InvalidConfig("spectrum: need at least one theta and one tau");
    for (double t : taus)
      if (!(t > 0) || !std::isfinite(t)) throw InvalidConfig("spectrum: tau must be positive");
    for (double t : thetas)
      if (!std::isfinite(t)) throw InvalidConfig("spectrum: theta must be finite");
    out << "theta,tau,rho_closed,rho_numeric,norm_closed,norm_numeric,lower,upper\n";
    for (double th : thetas)
      for (double ta : taus) {
        const auto r = two_lines_report(th, ta);
        out << io::format_number(r.theta) << ',' << io::format_number(r.tau) << ','
            << io::format_number(r.rho_closed) << ',' << io::format_number(r.rho_numeric) << ','
            << io::format_number(r.norm_closed) << ',' << io::format_number(r.norm_numeric) << ','
            << io::format_number(r.lower) << ',' << io::format_number(r.upper) << '\n';
      }
    return exit_ok;
  } catch (...) {
    return report_exception(err);
  }
}

int cmd_factor(const std::string& l_spec, double sigma, double tau, const std::string& route, double l_norm,
               std::uint64_t seed, std::ostream& out, std::ostream& err) {
  try {
    const Matrix l = parse_l_spec(l_spec, l_norm, seed);
    std::vector<FactorizationResult<double>> results;
    const bool all = route == "all";
    if (route != "all" && route != "cholesky" && route != "sqrt_sym" && route != "sqrt_polar")
      throw InvalidConfig("route: expected cholesky, sqrt_sym, sqrt_polar or all");
    if (all || route == "cholesky") results.push_back(factor_cholesky(l, sigma, tau));
    if (all || route == "sqrt_polar") {
      if (!all && sigma != tau) throw InvalidConfig("sqrt_polar: requires sigma = tau");
      if (sigma == tau) results.push_back(factor_sqrt_polar(l, sigma));
    }
    if (route == "sqrt_sym") results.push_back(factor_sqrt_sym(l));
    if (all && l.rows() == l.cols() && (l - l.transpose()).norm() == 0.0) {
      try {
        results.push_back(factor_sqrt_sym(l));
      } catch (const InvalidInput&) {
        // L is symmetric but outside the route's domain.
      }
    }
    out << "L: " << l.rows() << "x" << l.cols() << ", sigma " << io::format_number(sigma) << ", tau "
        << io::format_number(tau) << '\n';
    out << "route,M_rows,C_rows,C_cols,reconstruction_error\n";
    for (const auto& r : results)
      out << to_string(r.route) << ',' << l.rows() + l.cols() << ',' << r.C.rows() << ',' << r.C.cols() << ','
          << io::format_number(r.reconstruction_error) << '\n';
    return exit_ok;
  } catch (...) {
    return report_exception(err);
  }
}

int cmd_phantom(const PhantomOptions& opts, const std::filesystem::path& out_dir, std::ostream& out,
                std::ostream& err) {
  try {
    if (opts.iters < 0) throw InvalidConfig("--iters: must be nonnegative");
    if (opts.stride < 1) throw InvalidConfig("--stride: must be >= 1");
    if (!(opts.lambda > 0 && opts.lambda < 2)) throw InvalidConfig("--lambda: must lie in (0,2)");
    const PhantomProblem p = make_phantom(opts.grid_side, uniform_angles(opts.angles), opts.rays, opts.seed);
    const ExperimentReport rep = run_phantom(p, opts.iters, opts.lambda, opts.stride);
    io::ensure_dir(out_dir);
    std::vector<std::vector<double>> rows;
    for (const auto& h : rep.history) rows.push_back({double(h.k), h.residual, h.u_err});
    io::write_csv(out_dir / "phantom_history.csv", {"k", "residual", "shadow_error"}, rows);
    io::write_image_csv(out_dir / "phantom_image.csv", rep.final_image, p.grid_side);
    io::write_image_csv(out_dir / "phantom_truth.csv", p.x_true, p.grid_side);
    nlohmann::json j;
    j["grid_side"] = p.grid_side;
    j["angles"] = opts.angles;
    j["rays_per_angle"] = opts.rays;
    j["L_shape"] = {p.L.rows(), p.L.cols()};
    j["iterations"] = rep.iterations;
    j["sigma"] = rep.sigma;
    j["tau"] = rep.tau;
    j["final_shadow_error"] = rep.final_error;
    j["first_k_below_1e-6"] = rep.first_k_below ? nlohmann::json(*rep.first_k_below) : nlohmann::json(nullptr);
    j["prediction_error_to_truth"] = (rep.predicted - p.x_true).norm();
    j["wall_seconds"] = rep.wall_seconds;
    io::write_json(out_dir / "phantom_summary.json", j);
    out << "phantom " << p.grid_side << "x" << p.grid_side << ", L " << p.L.rows() << "x" << p.L.cols() << ": "
        << rep.iterations << " iterations, shadow error " << io::format_number(rep.final_error) << '\n';
    if (!std::isfinite(rep.final_error)) throw NumericalFailure("phantom: shadow error is not finite");
    return exit_ok;
  } catch (...) {
    return report_exception(err);
  }
}

int cmd_verify(const std::string& suite, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  try {
    const auto checks = run_verify_suite(suite, seed);
    int failed = 0;
    for (const auto& c : checks) {
      out << (c.passed ? "PASS " : "FAIL ") << c.suite << '/' << c.name << "  value " << io::format_number(c.value)
          << "  tol " << io::format_number(c.tolerance) << '\n';
      failed += c.passed ? 0 : 1;
    }
    out << checks.size() - std::size_t(failed) << '/' << checks.size() << " checks passed\n";
    return failed ? exit_numeric : exit_ok;
  } catch (...) {
    return report_exception(err);
  }
}

}  // namespace ppp::cli
