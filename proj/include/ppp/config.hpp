#pragma once

// Experiment configuration: a TOML-style file of [sections] holding
// `key = value` lines. Values are JSON scalars or (nested) arrays.
//
//   [problem]   method = "dr" | "cp" | "ryu" | "mt", dim, seed, u0 = [...]
//   [run]       iters, eps, lambda, stride
//   [A1] [A2]…  kind = "zero" | "full" | "trivial" | "subspace" | "random_subspace"
//                      | "line" | "point" | "linear"
//               basis = [[...], ...]   (subspace: one spanning vector per inner array)
//               rank = r               (random_subspace)
//               angle = 1.0 | "pi/3"   (line in R^2)
//               value = [...]          (point)
//               matrix = [[...], ...]  (linear, row-major)
//   [cp]        sigma, tau, L = [[...], ...] | "identity" | "random", L_rows, L_norm

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ppp/methods.hpp"

namespace ppp {

/// Parses "1.5", "pi", "pi/3", "2pi/3", "2*pi/3", "-pi/4".
double parse_angle(const std::string& text);

/// Comma-separated list of parse_angle values.
std::vector<double> parse_angle_list(const std::string& text);

/// Raw [section] -> key -> value view of a config file.
class ConfigTable {
public:
  static ConfigTable parse(const std::string& text);

  bool has_section(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;
  const nlohmann::json& get(const std::string& section, const std::string& key) const;
  std::vector<std::string> sections() const;
  std::vector<std::string> keys(const std::string& section) const;

private:
  std::map<std::string, std::map<std::string, nlohmann::json>> data_;
  std::vector<std::string> order_;
};

struct OperatorSpec {
  std::string name;
  std::string kind;
  std::optional<Matrix> basis;
  Index rank = 0;
  double angle = 0;
  std::optional<Vector> value;
  std::optional<Matrix> matrix;
};

struct ExperimentConfig {
  MethodFamily method = MethodFamily::dr;
  Index dim = 0;
  std::uint64_t seed = 0;
  std::optional<Vector> u0;
  Index iters = 10000;
  double eps = 1e-10;
  double lambda = 1.0;
  Index stride = 1;
  std::vector<OperatorSpec> ops;
  double sigma = 1.0;
  double tau = 1.0;
  /// "matrix", "identity" or "random".
  std::string L_mode = "identity";
  std::optional<Matrix> L;
  Index L_rows = 0;
  double L_norm = 0.9;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// A configuration with random pieces drawn and operators constructed.
struct RealizedProblem {
  MethodDescriptor<double> descriptor;
  /// The subspace behind each normal-cone operator (the whole space for "zero"), if any.
  std::vector<std::optional<Subspace<double>>> subspaces;
  /// Point b for operators of kind "point".
  std::vector<std::optional<Vector>> points;
  Vector u0;
};

/// Draws random subspaces, L and u0 (in that order) from config.seed and validates the method invariants.
RealizedProblem realize(const ExperimentConfig& cfg);

}  // namespace ppp
