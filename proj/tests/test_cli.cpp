#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string output;
};

// Runs the CLI with stderr folded into the captured output.
Result run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + PPP_CLI_PATH + "\" " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ppp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
};

const char* kTwoLines = R"(
[problem]
method = "cp"
dim = 2
seed = 1

[A1]
kind = "line"
angle = 0

[A2]
kind = "line"
angle = "pi/3"

[cp]
sigma = 1
tau = 1
L = "identity"
)";

}  // namespace

TEST_F(Cli, DouglasRachfordStartingAtFixedPoint) {
  // U1 = U2 = span(e1): (x, y) with x in U and y in U-perp is fixed, and w = x - y.
  const auto cfg = write("dr.toml",
                         "[problem]\nmethod = \"dr\"\ndim = 2\nu0 = [3.0, 0.0, 0.0, -2.0]\n"
                         "[A1]\nkind = \"subspace\"\nbasis = [[1, 0]]\n[A2]\nkind = \"subspace\"\nbasis = [[1, 0]]\n");
  const auto r = run_cli("run --config \"" + cfg.string() + "\" --out \"" + (dir_ / "out").string() + "\"");
  ASSERT_EQ(r.code, 0) << r.output;
  const auto j = nlohmann::json::parse(slurp(dir_ / "out" / "summary.json"));
  EXPECT_TRUE(j["converged"].get<bool>());
  EXPECT_EQ(j["iterations"].get<int>(), 0);
  EXPECT_EQ(j["achieved_limit"]["w"][0].get<double>(), 3.0);
  EXPECT_EQ(j["achieved_limit"]["w"][1].get<double>(), 2.0);
  EXPECT_LE(j["limit_error"]["w"].get<double>(), 1e-12);
}

TEST_F(Cli, TwoLinesRunReportsRate) {
  const auto cfg = write("two.toml", kTwoLines);
  const auto out = dir_ / "out";
  const auto r = run_cli("run --config \"" + cfg.string() + "\" --out \"" + out.string() + "\" --stride 5");
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("converged"), std::string::npos);
  const auto j = nlohmann::json::parse(slurp(out / "summary.json"));
  EXPECT_NEAR(j["rho"].get<double>(), 0.5, 1e-9);
  EXPECT_EQ(j["method"].get<std::string>(), "cp");
  EXPECT_LE(j["max_intertwine_violation"].get<double>(), 1e-9);
  EXPECT_LE(j["limit_error"]["Tu"].get<double>(), 1e-8);
  EXPECT_EQ(first_line(out / "trace.csv"), "k,residual,w_err,u_err,intertwine");
}

TEST_F(Cli, OverridesAreValidated) {
  const auto cfg = write("two.toml", kTwoLines);
  const auto r = run_cli("run --config \"" + cfg.string() + "\" --out \"" + (dir_ / "o").string() + "\" --lambda 2.5");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("--lambda"), std::string::npos);
}

TEST_F(Cli, MalformedConfigNamesTheField) {
  const auto cfg = write("bad.toml", "[problem]\nmethod = \"dr\"\ndim = \"two\"\n");
  const auto r = run_cli("run --config \"" + cfg.string() + "\" --out \"" + (dir_ / "o").string() + "\"");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("[problem].dim"), std::string::npos);
  EXPECT_EQ(run_cli("run --config \"" + (dir_ / "missing.toml").string() + "\"").code, 2);
  EXPECT_EQ(run_cli("nonsense").code, 2);
}

TEST_F(Cli, InfeasibleAffineProblem) {
  const auto cfg = write("inf.toml",
                         "[problem]\nmethod = \"cp\"\ndim = 2\n[A1]\nkind = \"subspace\"\nbasis = [[1, 0]]\n"
                         "[A2]\nkind = \"point\"\nvalue = [0, 1]\n[cp]\nL = \"identity\"\nsigma = 0.5\ntau = 0.5\n");
  const auto r = run_cli("run --config \"" + cfg.string() + "\" --out \"" + (dir_ / "o").string() + "\"");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.output.find("infeasible"), std::string::npos);
}

TEST_F(Cli, SpectrumAnchors) {
  const auto r = run_cli("spectrum --theta 0,pi/2 --tau 1");
  ASSERT_EQ(r.code, 0) << r.output;
  std::istringstream in(r.output);
  std::string header, row0, row1;
  std::getline(in, header);
  std::getline(in, row0);
  std::getline(in, row1);
  EXPECT_EQ(header, "theta,tau,rho_closed,rho_numeric,norm_closed,norm_numeric,lower,upper");
  auto field = [](const std::string& row, int idx) {
    std::istringstream s(row);
    std::string f;
    for (int i = 0; i <= idx; ++i) std::getline(s, f, ',');
    return std::stod(f);
  };
  EXPECT_NEAR(field(row0, 4), std::sqrt(2.0), 1e-10);
  EXPECT_NEAR(field(row0, 5), std::sqrt(2.0), 1e-10);
  EXPECT_NEAR(field(row0, 2), 1.0, 1e-12);
  EXPECT_NEAR(field(row1, 4), 2.0, 1e-10);
  EXPECT_NEAR(field(row1, 5), 2.0, 1e-10);
  EXPECT_NEAR(field(row1, 3), 0.0, 1e-9);
  EXPECT_EQ(run_cli("spectrum --theta pie --tau 1").code, 2);
}

TEST_F(Cli, FactorZeroOperator) {
  const auto r = run_cli("factor --L zero:2x3 --route all");
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("route,M_rows,C_rows,C_cols,reconstruction_error"), std::string::npos);
  EXPECT_NE(r.output.find("cholesky,5,5,5,0"), std::string::npos);
}

TEST_F(Cli, FactorRejectsBadStepSizes) {
  EXPECT_EQ(run_cli("factor --L identity:2 --sigma 2 --tau 1").code, 2);
  EXPECT_EQ(run_cli("factor --L wrong:2").code, 2);
}

TEST_F(Cli, PhantomOutputs) {
  const auto out = dir_ / "ph";
  const auto r = run_cli("phantom --grid 8 --angles 4 --rays 8 --iters 50 --stride 10 --out \"" + out.string() + "\"");
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(first_line(out / "phantom_history.csv"), "k,residual,shadow_error");
  EXPECT_TRUE(fs::exists(out / "phantom_image.csv"));
  EXPECT_TRUE(fs::exists(out / "phantom_truth.csv"));
  const auto j = nlohmann::json::parse(slurp(out / "phantom_summary.json"));
  EXPECT_TRUE(j.is_object());
  EXPECT_EQ(run_cli("phantom --grid 7").code, 2);
}

TEST_F(Cli, VerifyAllPasses) {
  const auto r = run_cli("verify all");
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(r.output.find("FAIL"), std::string::npos);
  EXPECT_NE(r.output.find("checks passed"), std::string::npos);
}
