#include "ppp/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "ppp/random.hpp"

namespace ppp {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

int bracket_balance(const std::string& s) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
    if (in_string) continue;
    if (s[i] == '[') ++depth;
    if (s[i] == ']') --depth;
  }
  return depth;
}

/// TOML allows a trailing comma before a closing bracket; JSON does not.
std::string drop_trailing_commas(const std::string& s) {
  std::string out;
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
    if (!in_string && s[i] == ',') {
      std::size_t j = i + 1;
      while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
      if (j < s.size() && s[j] == ']') continue;
    }
    out += s[i];
  }
  return out;
}

bool is_identifier(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

std::string field(const std::string& section, const std::string& key) { return "[" + section + "]." + key; }

[[noreturn]] void bad(const std::string& section, const std::string& key, const std::string& what) {
  throw InvalidConfig(field(section, key) + ": " + what);
}

double get_double(const ConfigTable& t, const std::string& s, const std::string& k) {
  const auto& v = t.get(s, k);
  if (!v.is_number()) bad(s, k, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) bad(s, k, "expected a finite number");
  return x;
}

Index get_int(const ConfigTable& t, const std::string& s, const std::string& k) {
  const auto& v = t.get(s, k);
  if (!v.is_number_integer()) bad(s, k, "expected an integer");
  return static_cast<Index>(v.get<long long>());
}

std::string get_string(const ConfigTable& t, const std::string& s, const std::string& k) {
  const auto& v = t.get(s, k);
  if (!v.is_string()) bad(s, k, "expected a string");
  return v.get<std::string>();
}

Vector to_vector(const nlohmann::json& v, const std::string& s, const std::string& k) {
  if (!v.is_array()) bad(s, k, "expected an array of numbers");
  Vector out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) bad(s, k, "expected an array of numbers");
    out(Index(i)) = v[i].get<double>();
  }
  if (!out.allFinite()) bad(s, k, "non-finite entry");
  return out;
}

/// Nested array, one inner array per row.
Matrix to_matrix(const nlohmann::json& v, const std::string& s, const std::string& k) {
  if (!v.is_array() || v.empty()) bad(s, k, "expected a nonempty array of rows");
  const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
  if (cols == 0) bad(s, k, "expected nonempty rows");
  Matrix out(static_cast<Index>(v.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_array() || v[i].size() != cols) bad(s, k, "rows must all have the same length");
    out.row(Index(i)) = to_vector(v[i], s, k).transpose();
  }
  return out;
}

void reject_unknown(const ConfigTable& t, const std::string& section, const std::set<std::string>& allowed) {
  for (const auto& k : t.keys(section))
    if (!allowed.count(k)) bad(section, k, "unknown key");
}

}  // namespace

double parse_angle(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s.empty()) throw InvalidConfig("empty angle");
  const auto pi_pos = s.find("pi");
  auto number = [&](const std::string& part) {
    std::size_t used = 0;
    double x = 0;
    try {
      x = std::stod(part, &used);
    } catch (const std::exception&) {
      throw InvalidConfig("malformed angle '" + text + "'");
    }
    if (used != part.size()) throw InvalidConfig("malformed angle '" + text + "'");
    return x;
  };
  if (pi_pos == std::string::npos) return number(s);
  std::string coef = s.substr(0, pi_pos);
  if (!coef.empty() && coef.back() == '*') coef.pop_back();
  double c = 1.0;
  if (coef == "-") c = -1.0;
  else if (coef == "+" || coef.empty()) c = 1.0;
  else c = number(coef);
  const std::string rest = s.substr(pi_pos + 2);
  double denom = 1.0;
  if (!rest.empty()) {
    if (rest[0] != '/') throw InvalidConfig("malformed angle '" + text + "'");
    denom = number(rest.substr(1));
    if (denom == 0.0) throw InvalidConfig("angle '" + text + "' divides by zero");
  }
  return c * std::numbers::pi / denom;
}

std::vector<double> parse_angle_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_angle(item));
  if (out.empty()) throw InvalidConfig("empty list");
  return out;
}

ConfigTable ConfigTable::parse(const std::string& text) {
  ConfigTable t;
  std::istringstream in(text);
  std::string raw, section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw InvalidConfig(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!is_identifier(section)) throw InvalidConfig(where + ": malformed section name '" + section + "'");
      if (t.data_.count(section)) throw InvalidConfig(where + ": duplicate section [" + section + "]");
      t.data_[section];
      t.order_.push_back(section);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidConfig(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (section.empty()) throw InvalidConfig(where + ": key '" + key + "' outside of any section");
    if (!is_identifier(key)) throw InvalidConfig(where + ": malformed key '" + key + "'");
    while (bracket_balance(value) > 0 && std::getline(in, raw)) {
      ++line_no;
      value += " " + trim(strip_comment(raw));
    }
    if (t.data_[section].count(key)) throw InvalidConfig(field(section, key) + ": duplicate key");
    try {
      t.data_[section][key] = nlohmann::json::parse(drop_trailing_commas(value));
    } catch (const nlohmann::json::parse_error&) {
      throw InvalidConfig(field(section, key) + ": malformed value '" + value + "'");
    }
  }
  return t;
}

bool ConfigTable::has_section(const std::string& section) const { return data_.count(section) > 0; }

bool ConfigTable::has(const std::string& section, const std::string& key) const {
  auto it = data_.find(section);
  return it != data_.end() && it->second.count(key) > 0;
}

const nlohmann::json& ConfigTable::get(const std::string& section, const std::string& key) const {
  if (!has(section, key)) throw InvalidConfig(field(section, key) + ": missing");
  return data_.at(section).at(key);
}

std::vector<std::string> ConfigTable::sections() const { return order_; }

std::vector<std::string> ConfigTable::keys(const std::string& section) const {
  std::vector<std::string> out;
  auto it = data_.find(section);
  if (it == data_.end()) return out;
  for (const auto& kv : it->second) out.push_back(kv.first);
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  const ConfigTable t = ConfigTable::parse(text);
  ExperimentConfig cfg;
  if (!t.has_section("problem")) throw InvalidConfig("[problem]: missing section");
  reject_unknown(t, "problem", {"method", "dim", "seed", "u0"});
  try {
    cfg.method = parse_method_family(get_string(t, "problem", "method"));
  } catch (const InvalidConfig& e) {
    if (std::string(e.what()).rfind("[problem]", 0) == 0) throw;
    bad("problem", "method", e.what());
  }
  cfg.dim = get_int(t, "problem", "dim");
  if (cfg.dim < 1) bad("problem", "dim", "must be positive");
  if (t.has("problem", "seed")) {
    const Index seed = get_int(t, "problem", "seed");
    if (seed < 0) bad("problem", "seed", "must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(seed);
  }
  if (t.has("problem", "u0")) cfg.u0 = to_vector(t.get("problem", "u0"), "problem", "u0");

  if (t.has_section("run")) {
    reject_unknown(t, "run", {"iters", "eps", "lambda", "stride"});
    if (t.has("run", "iters")) {
      cfg.iters = get_int(t, "run", "iters");
      if (cfg.iters < 0) bad("run", "iters", "must be nonnegative");
    }
    if (t.has("run", "eps")) {
      cfg.eps = get_double(t, "run", "eps");
      if (!(cfg.eps > 0)) bad("run", "eps", "must be positive");
    }
    if (t.has("run", "lambda")) {
      cfg.lambda = get_double(t, "run", "lambda");
      if (!(cfg.lambda > 0 && cfg.lambda < 2)) bad("run", "lambda", "must lie in (0,2)");
    }
    if (t.has("run", "stride")) {
      cfg.stride = get_int(t, "run", "stride");
      if (cfg.stride < 1) bad("run", "stride", "must be >= 1");
    }
  }

  for (int i = 1; t.has_section("A" + std::to_string(i)); ++i) {
    const std::string s = "A" + std::to_string(i);
    OperatorSpec op;
    op.name = s;
    op.kind = get_string(t, s, "kind");
    if (op.kind == "zero" || op.kind == "full" || op.kind == "trivial") {
      reject_unknown(t, s, {"kind"});
    } else if (op.kind == "subspace") {
      reject_unknown(t, s, {"kind", "basis"});
      op.basis = to_matrix(t.get(s, "basis"), s, "basis");
    } else if (op.kind == "random_subspace") {
      reject_unknown(t, s, {"kind", "rank"});
      op.rank = get_int(t, s, "rank");
      if (op.rank < 0) bad(s, "rank", "must be nonnegative");
    } else if (op.kind == "line") {
      reject_unknown(t, s, {"kind", "angle"});
      const auto& a = t.get(s, "angle");
      if (a.is_string()) {
        try {
          op.angle = parse_angle(a.get<std::string>());
        } catch (const InvalidConfig& e) {
          bad(s, "angle", e.what());
        }
      } else {
        op.angle = get_double(t, s, "angle");
      }
    } else if (op.kind == "point") {
      reject_unknown(t, s, {"kind", "value"});
      op.value = to_vector(t.get(s, "value"), s, "value");
    } else if (op.kind == "linear") {
      reject_unknown(t, s, {"kind", "matrix"});
      op.matrix = to_matrix(t.get(s, "matrix"), s, "matrix");
    } else {
      bad(s, "kind", "unknown operator kind '" + op.kind + "'");
    }
    cfg.ops.push_back(std::move(op));
  }
  for (const auto& s : t.sections()) {
    if (s == "problem" || s == "run" || s == "cp") continue;
    bool is_op = false;
    for (const auto& op : cfg.ops) is_op = is_op || op.name == s;
    if (!is_op) throw InvalidConfig("[" + s + "]: unknown section");
  }

  const std::size_t needed = cfg.method == MethodFamily::ryu ? 3 : (cfg.method == MethodFamily::mt ? 3 : 2);
  if (cfg.ops.size() < needed) {
    const std::string missing = "A" + std::to_string(cfg.ops.size() + 1);
    throw InvalidConfig("[" + missing + "]: missing operator section (" + std::string(to_string(cfg.method)) +
                        " needs " + (cfg.method == MethodFamily::mt ? "at least 3" : std::to_string(needed)) + ")");
  }
  if (cfg.method != MethodFamily::mt && cfg.ops.size() > needed)
    throw InvalidConfig("[A" + std::to_string(needed + 1) + "]: too many operators for " + to_string(cfg.method));

  if (cfg.method == MethodFamily::cp) {
    if (t.has_section("cp")) {
      reject_unknown(t, "cp", {"sigma", "tau", "L", "L_rows", "L_norm"});
      if (t.has("cp", "sigma")) cfg.sigma = get_double(t, "cp", "sigma");
      if (t.has("cp", "tau")) cfg.tau = get_double(t, "cp", "tau");
      if (!(cfg.sigma > 0)) bad("cp", "sigma", "must be positive");
      if (!(cfg.tau > 0)) bad("cp", "tau", "must be positive");
      if (t.has("cp", "L")) {
        const auto& l = t.get("cp", "L");
        if (l.is_string()) {
          cfg.L_mode = l.get<std::string>();
          if (cfg.L_mode != "identity" && cfg.L_mode != "random")
            bad("cp", "L", "expected a matrix, \"identity\" or \"random\"");
        } else {
          cfg.L_mode = "matrix";
          cfg.L = to_matrix(l, "cp", "L");
          if (cfg.L->cols() != cfg.dim) bad("cp", "L", "must have [problem].dim columns");
        }
      }
      if (t.has("cp", "L_rows")) {
        cfg.L_rows = get_int(t, "cp", "L_rows");
        if (cfg.L_rows < 1) bad("cp", "L_rows", "must be positive");
      }
      if (t.has("cp", "L_norm")) {
        cfg.L_norm = get_double(t, "cp", "L_norm");
        if (!(cfg.L_norm >= 0)) bad("cp", "L_norm", "must be nonnegative");
      }
    }
  } else if (t.has_section("cp")) {
    throw InvalidConfig("[cp]: section only applies to method \"cp\"");
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

RealizedProblem realize(const ExperimentConfig& cfg) {
  Rng rng(cfg.seed);
  RealizedProblem out;
  auto& desc = out.descriptor;
  desc.family = cfg.method;

  Index m = cfg.dim;
  if (cfg.method == MethodFamily::cp) {
    if (cfg.L_mode == "matrix") m = cfg.L->rows();
    else if (cfg.L_mode == "random" && cfg.L_rows > 0) m = cfg.L_rows;
  }

  for (std::size_t i = 0; i < cfg.ops.size(); ++i) {
    const OperatorSpec& op = cfg.ops[i];
    const Index d = (cfg.method == MethodFamily::cp && i == 1) ? m : cfg.dim;
    std::optional<Subspace<double>> sub;
    std::optional<Vector> point;
    if (op.kind == "zero") {
      // N_X = 0 is the normal cone of the whole space.
      desc.ops.push_back(ResolventOp<double>::zero(d));
      out.subspaces.push_back(Subspace<double>::full(d));
      out.points.push_back(std::nullopt);
      continue;
    } else if (op.kind == "full") {
      sub = Subspace<double>::full(d);
    } else if (op.kind == "trivial") {
      sub = Subspace<double>::trivial(d);
    } else if (op.kind == "subspace") {
      if (op.basis->cols() != d) bad(op.name, "basis", "vectors must have length " + std::to_string(d));
      sub = orthonormal_basis(Matrix(op.basis->transpose()));
    } else if (op.kind == "random_subspace") {
      if (op.rank > d) bad(op.name, "rank", "exceeds the space dimension " + std::to_string(d));
      sub = random_subspace(rng, d, op.rank);
    } else if (op.kind == "line") {
      if (d != 2) bad(op.name, "kind", "\"line\" requires a 2-dimensional space");
      Matrix b(2, 1);
      b << std::cos(op.angle), std::sin(op.angle);
      sub = Subspace<double>::from_orthonormal(b);
    } else if (op.kind == "point") {
      if (op.value->size() != d) bad(op.name, "value", "must have length " + std::to_string(d));
      point = *op.value;
      desc.ops.push_back(ResolventOp<double>::normal_cone_point(*op.value));
    } else if (op.kind == "linear") {
      if (op.matrix->rows() != d || op.matrix->cols() != d)
        bad(op.name, "matrix", "must be " + std::to_string(d) + "x" + std::to_string(d));
      try {
        desc.ops.push_back(ResolventOp<double>::linear_monotone(*op.matrix));
      } catch (const InvalidInput& e) {
        bad(op.name, "matrix", e.what());
      }
    }
    if (sub) desc.ops.push_back(ResolventOp<double>::normal_cone(*sub));
    out.subspaces.push_back(sub);
    out.points.push_back(point);
  }

  if (cfg.method == MethodFamily::cp) {
    desc.sigma = cfg.sigma;
    desc.tau = cfg.tau;
    if (cfg.L_mode == "matrix") {
      desc.L = *cfg.L;
    } else if (cfg.L_mode == "identity") {
      desc.L = Matrix::Identity(cfg.dim, cfg.dim);
    } else {
      desc.L = random_matrix_with_norm(rng, m, cfg.dim, cfg.L_norm);
    }
  }
  desc.validate();

  Index dim_h = 0;
  switch (cfg.method) {
    case MethodFamily::dr: dim_h = 2 * cfg.dim; break;
    case MethodFamily::cp: dim_h = cfg.dim + m; break;
    case MethodFamily::ryu: dim_h = 5 * cfg.dim; break;
    case MethodFamily::mt: dim_h = (2 * Index(cfg.ops.size()) - 1) * cfg.dim; break;
  }
  if (cfg.u0) {
    if (cfg.u0->size() != dim_h) bad("problem", "u0", "must have length " + std::to_string(dim_h));
    out.u0 = *cfg.u0;
  } else {
    out.u0 = gaussian_vector(rng, dim_h);
  }
  return out;
}

}  // namespace ppp
