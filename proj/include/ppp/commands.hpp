#pragma once

// Subcommands behind the `ppp` executable. Each returns a process exit code.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ppp/config.hpp"
#include "ppp/experiments.hpp"

namespace ppp::cli {

enum ExitCode : int { exit_ok = 0, exit_numeric = 1, exit_config = 2, exit_infeasible = 3 };

/// Maps the exception currently being handled to an exit code and writes a diagnostic.
int report_exception(std::ostream& err);

/// Command-line values that take precedence over the config file.
struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<Index> iters;
  std::optional<double> lambda;
  std::optional<double> eps;
  std::optional<Index> stride;
};

void apply_overrides(ExperimentConfig& cfg, const RunOverrides& o);

struct RunOutcome {
  nlohmann::json summary;
  std::vector<TraceRow> trace;
};

/// PPP and rPPP in lockstep on a realized config. w_err and u_err are nan when no prediction exists.
RunOutcome run_experiment(const ExperimentConfig& cfg);

/// Writes <out>/trace.csv and <out>/summary.json.
int cmd_run(const std::filesystem::path& config, const std::filesystem::path& out_dir, const RunOverrides& overrides,
            std::ostream& out, std::ostream& err);

/// CSV table theta,tau,rho_closed,rho_numeric,norm_closed,norm_numeric,lower,upper.
int cmd_spectrum(const std::vector<double>& thetas, const std::vector<double>& taus, std::ostream& out,
                 std::ostream& err);

/// `l_spec` is a JSON matrix, "zero:MxN", "identity:N" or "random:MxN" (operator norm `l_norm`).
/// `route` is cholesky, sqrt_sym, sqrt_polar or all.
int cmd_factor(const std::string& l_spec, double sigma, double tau, const std::string& route, double l_norm,
               std::uint64_t seed, std::ostream& out, std::ostream& err);

struct PhantomOptions {
  int grid_side = 16;
  int angles = 18;
  int rays = 24;
  Index iters = 20000;
  double lambda = 1.0;
  Index stride = 100;
  std::uint64_t seed = 0;
};

/// Writes phantom_history.csv (k,residual,shadow_error), phantom_image.csv, phantom_truth.csv
/// and phantom_summary.json.
int cmd_phantom(const PhantomOptions& opts, const std::filesystem::path& out_dir, std::ostream& out,
                std::ostream& err);

struct VerifyCheck {
  std::string suite;
  std::string name;
  double value = 0;
  double tolerance = 0;
  bool passed = false;
};

std::vector<std::string> verify_suites();

/// Throws InvalidConfig for an unknown suite name; "all" runs every suite.
std::vector<VerifyCheck> run_verify_suite(const std::string& suite, std::uint64_t seed = 7);

int cmd_verify(const std::string& suite, std::uint64_t seed, std::ostream& out, std::ostream& err);

}  // namespace ppp::cli
