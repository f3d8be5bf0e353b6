#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ppp/commands.hpp"

int main(int argc, char** argv) {
  using namespace ppp;
  CLI::App app{"Preconditioned proximal point experiments"};
  app.require_subcommand(1);

  std::string config, out_dir = "ppp_out";
  cli::RunOverrides over;
  std::uint64_t seed = 0;
  Index iters = 0, stride = 0;
  double lambda = 1.0, eps = 0.0;

  auto* run = app.add_subcommand("run", "Run PPP and rPPP in lockstep on a config file");
  run->add_option("--config", config, "Config file")->required();
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();
  auto* run_seed = run->add_option("--seed", seed, "Override [problem].seed");
  auto* run_iters = run->add_option("--iters", iters, "Override [run].iters");
  auto* run_lambda = run->add_option("--lambda", lambda, "Override [run].lambda");
  auto* run_eps = run->add_option("--eps", eps, "Override [run].eps");
  auto* run_stride = run->add_option("--stride", stride, "Override [run].stride");

  std::string thetas = "0,pi/12,pi/6,pi/4,pi/3,5pi/12,pi/2", taus = "1";
  auto* spectrum = app.add_subcommand("spectrum", "Two-lines spectral radius and operator norm table");
  spectrum->add_option("--theta", thetas, "Comma-separated angles, e.g. 0,pi/3")->capture_default_str();
  spectrum->add_option("--tau", taus, "Comma-separated step sizes")->capture_default_str();

  std::string l_spec = "random:4x3", route = "all";
  double sigma = 1.0, tau = 1.0, l_norm = 0.9;
  auto* factor = app.add_subcommand("factor", "Factor the Chambolle-Pock preconditioner M = C C^T");
  factor->add_option("--L", l_spec, "JSON matrix, zero:MxN, identity:N or random:MxN")->capture_default_str();
  factor->add_option("--sigma", sigma)->capture_default_str();
  factor->add_option("--tau", tau)->capture_default_str();
  factor->add_option("--route", route, "cholesky, sqrt_sym, sqrt_polar or all")->capture_default_str();
  factor->add_option("--norm", l_norm, "Operator norm of a random L")->capture_default_str();
  factor->add_option("--seed", seed);

  cli::PhantomOptions ph;
  std::string ph_out = "ppp_out";
  auto* phantom = app.add_subcommand("phantom", "Tomography-style reconstruction with Chambolle-Pock");
  phantom->add_option("--grid", ph.grid_side)->capture_default_str();
  phantom->add_option("--angles", ph.angles)->capture_default_str();
  phantom->add_option("--rays", ph.rays)->capture_default_str();
  phantom->add_option("--iters", ph.iters)->capture_default_str();
  phantom->add_option("--lambda", ph.lambda)->capture_default_str();
  phantom->add_option("--stride", ph.stride)->capture_default_str();
  phantom->add_option("--seed", ph.seed)->capture_default_str();
  phantom->add_option("--out", ph_out)->capture_default_str();

  std::string suite = "all";
  auto* verify = app.add_subcommand("verify", "Run an invariant self-check suite");
  verify->add_option("suite", suite, "linalg, monotone, core, methods, limits, analysis or all")
      ->capture_default_str();
  verify->add_option("--seed", seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::exit_config;
  }

  if (*run) {
    if (*run_seed) over.seed = seed;
    if (*run_iters) over.iters = iters;
    if (*run_lambda) over.lambda = lambda;
    if (*run_eps) over.eps = eps;
    if (*run_stride) over.stride = stride;
    return cli::cmd_run(config, out_dir, over, std::cout, std::cerr);
  }
  if (*spectrum) {
    try {
      return cli::cmd_spectrum(parse_angle_list(thetas), parse_angle_list(taus), std::cout, std::cerr);
    } catch (...) {
      return cli::report_exception(std::cerr);
    }
  }
  if (*factor) return cli::cmd_factor(l_spec, sigma, tau, route, l_norm, seed, std::cout, std::cerr);
  if (*phantom) return cli::cmd_phantom(ph, ph_out, std::cout, std::cerr);
  if (*verify) return cli::cmd_verify(suite, seed ? seed : 7, std::cout, std::cerr);
  return cli::exit_config;
}
