#include <gtest/gtest.h>

#include "helpers.hpp"
#include "ppp/analysis.hpp"
#include "ppp/limits.hpp"
#include "ppp/methods.hpp"

using namespace ppp;
using namespace testing_support;

namespace {

using Op = ResolventOp<double>;

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Subspace<double> line(double theta) {
  Matrix b(2, 1);
  b << std::cos(theta), std::sin(theta);
  return Subspace<double>::from_orthonormal(b);
}

PPPInstance<double> two_lines_instance(double theta, double tau) {
  return build_cp(Op::normal_cone(line(0)), Op::normal_cone(line(theta)), Matrix(Matrix::Identity(2, 2)), 1.0 / tau,
                  tau);
}

std::vector<PPPInstance<double>> random_instances(Rng& rng) {
  const Index d = 4;
  std::vector<PPPInstance<double>> out;
  out.push_back(build_dr(Op::normal_cone(random_sub(rng, d)), Op::normal_cone(random_sub(rng, d))));
  const Matrix l = gauss(rng, 3, d);
  const double ln = operator_norm(l);
  out.push_back(build_cp(Op::normal_cone(random_sub(rng, d)), Op::normal_cone(random_sub(rng, 3)), l, 0.9 / ln,
                         1.0 / ln));
  out.push_back(build_ryu(Op::normal_cone(random_sub(rng, d)), Op::normal_cone(random_sub(rng, d)),
                          Op::normal_cone(random_sub(rng, d))));
  out.push_back(build_mt(std::vector<Op>{Op::normal_cone(random_sub(rng, d)), Op::normal_cone(random_sub(rng, d)),
                          Op::normal_cone(random_sub(rng, d)), Op::normal_cone(random_sub(rng, d))}));
  return out;
}

}  // namespace

TEST(PPPInstanceType, Validation) {
  const auto resolvent = [](const Vector& x) { return x; };
  EXPECT_THROW(PPPInstance<double>(Matrix(0, 0), resolvent, "empty"), InvalidInput);
  EXPECT_THROW(PPPInstance<double>(Matrix(Matrix::Identity(2, 3)), resolvent, "wide"), InvalidInput);
  Matrix rank_deficient(3, 2);
  rank_deficient << 1, 2, 1, 2, 1, 2;
  EXPECT_THROW(PPPInstance<double>(rank_deficient, resolvent, "deficient"), InvalidInput);
  EXPECT_THROW(PPPInstance<double>(Matrix(Matrix::Identity(2, 2)), PPPInstance<double>::Map{}, "none"), InvalidInput);
  PPPInstance<double> ok(Matrix(Matrix::Identity(3, 2)), resolvent, "ok");
  EXPECT_EQ(ok.dim_H(), 3);
  EXPECT_EQ(ok.dim_D(), 2);
  EXPECT_EQ(ok.label(), "ok");
  EXPECT_THROW(ok.apply_C(Vector(Vector::Zero(3))), DimensionMismatch);
  EXPECT_THROW(apply_T(ok, Vector(Vector::Zero(2))), DimensionMismatch);
}

TEST(ApplyT, DouglasRachfordZeroOperators) {
  // M(x,y) = (x-y, y-x); first block J(x-y) = x-y, second block J_{0^{-1}}(...) = 0.
  const auto inst = build_dr(Op::zero(2), Op::zero(2));
  const Vector x = vec({1, 5}), y = vec({-2, 3});
  const Vector tu = apply_T(inst, vcat(x, y));
  EXPECT_LT((tu - vcat(Vector(x - y), Vector(Vector::Zero(2)))).norm(), 1e-15);
}

TEST(ApplyT, FixedPointIsKept) {
  Rng rng(31);
  for (auto& inst : random_instances(rng)) {
    const Matrix t = assemble_T(inst);
    const Matrix f = fix_oracle(t);
    if (f.cols() == 0) continue;
    const Vector u = f * gauss_vec(rng, f.cols());
    EXPECT_LT((apply_T(inst, u) - u).norm(), 1e-9 * std::max(1.0, u.norm()));
  }
}

TEST(ApplyT, TwoLinesMatrix) {
  for (double theta : {pi / 2, pi / 3, 0.2})
    for (double tau : {1.0, 0.5, 3.0}) {
      const Matrix t = assemble_T(two_lines_instance(theta, tau));
      EXPECT_LT(max_abs(t - two_lines_T(theta, tau)), 1e-12) << theta << " " << tau;
    }
}

TEST(ApplyTtilde, Examples) {
  const auto zero = build_dr(Op::zero(3), Op::zero(3));
  EXPECT_LT(max_abs(assemble_Ttilde(zero) - Matrix::Identity(3, 3)), 1e-15);

  const auto e1 = Subspace<double>::coordinate(2, std::vector<Index>{0});
  const auto same = build_dr(Op::normal_cone(e1), Op::normal_cone(e1));
  EXPECT_LT(max_abs(assemble_Ttilde(same) - Matrix::Identity(2, 2)), 1e-15);

  const auto diag = build_dr(Op::normal_cone(line(0)), Op::normal_cone(line(pi / 4)));
  EXPECT_LT((apply_Ttilde(diag, vec({1, 1})) - vec({0, 1})).norm(), 1e-15);
}

TEST(RunPPP, StartAtFixedPoint) {
  const auto e1 = Subspace<double>::coordinate(2, std::vector<Index>{0});
  const auto inst = build_dr(Op::normal_cone(e1), Op::normal_cone(e1));
  const Vector u = vec({3, 0, 0, 1});
  const auto tr = run_ppp(inst, u, LambdaSchedule<double>(), 100);
  EXPECT_TRUE(tr.converged());
  EXPECT_EQ(tr.last_k, 0);
  EXPECT_EQ(tr.records.front().residual, 0.0);
}

TEST(RunPPP, IdenticalLinesStabilizeAfterOneStep) {
  const auto e1 = Subspace<double>::coordinate(2, std::vector<Index>{0});
  const auto inst = build_dr(Op::normal_cone(e1), Op::normal_cone(e1));
  const Vector u0 = vec({1, 2, 3, 4});
  EXPECT_LT((inst.apply_Ct(u0) - vec({-2, -2})).norm(), 1e-15);
  RunOptions<double> opt;
  opt.max_iters = 10;
  opt.store_iterates = true;
  opt.monitor_intertwining = true;
  const auto tr = run_ppp(inst, u0, LambdaSchedule<double>(), opt);
  EXPECT_TRUE(tr.converged());
  EXPECT_EQ(tr.last_k, 1);
  for (const auto& r : tr.records) EXPECT_LT((*r.w - vec({-2, -2})).norm(), 1e-15);
  EXPECT_LT((tr.final_point - vec({-2, 0, 0, 2})).norm(), 1e-15);
}

TEST(RunPPP, TwoLinesGeometricRate) {
  const auto inst = two_lines_instance(pi / 3, 1.0);
  Rng rng(32);
  RunOptions<double> opt;
  opt.max_iters = 60;
  opt.eps = 1e-300;
  const auto tr = run_ppp(inst, gauss_vec(rng, 4), LambdaSchedule<double>(), opt);
  ASSERT_GE(tr.records.size(), 60u);
  const double ratio = std::pow(tr.records[50].residual / tr.records[10].residual, 1.0 / 40);
  EXPECT_NEAR(ratio, 0.5, 0.05);
}

TEST(RunPPP, RecordStrideAndBudget) {
  Rng rng(33);
  const auto inst = two_lines_instance(0.3, 1.0);
  RunOptions<double> opt;
  opt.max_iters = 25;
  opt.eps = 1e-300;
  opt.record_stride = 10;
  const auto tr = run_ppp(inst, gauss_vec(rng, 4), LambdaSchedule<double>(), opt);
  ASSERT_EQ(tr.records.size(), 4u);
  EXPECT_EQ(tr.records[0].k, 0);
  EXPECT_EQ(tr.records[2].k, 20);
  EXPECT_EQ(tr.records[3].k, 25);
  EXPECT_EQ(tr.status, RunStatus::max_iters);
  opt.record_stride = 0;
  EXPECT_THROW(run_ppp(inst, gauss_vec(rng, 4), LambdaSchedule<double>(), opt), InvalidConfig);
  opt.record_stride = 1;
  opt.eps = 0;
  EXPECT_THROW(run_ppp(inst, gauss_vec(rng, 4), LambdaSchedule<double>(), opt), InvalidConfig);
}

TEST(RunPPP, ZeroBudgetEvaluatesOnce) {
  const auto inst = two_lines_instance(0.3, 1.0);
  const auto tr = run_ppp(inst, vec({1, 1, 1, 1}), LambdaSchedule<double>(), 0);
  EXPECT_EQ(tr.records.size(), 1u);
  EXPECT_EQ(tr.final_point, vec({1, 1, 1, 1}));
}

TEST(RunRPPP, StartAtFixedPoint) {
  const auto e1 = Subspace<double>::coordinate(2, std::vector<Index>{0});
  const auto inst = build_dr(Op::normal_cone(e1), Op::normal_cone(e1));
  const auto tr = run_rppp(inst, vec({4, -1}), LambdaSchedule<double>(), 100);
  EXPECT_TRUE(tr.converged());
  EXPECT_EQ(tr.last_k, 0);
}

TEST(RunRPPP, LineAndDiagonalGoToZero) {
  const auto inst = build_dr(Op::normal_cone(line(0)), Op::normal_cone(line(pi / 4)));
  const auto tr = run_rppp(inst, vec({3, -7}), LambdaSchedule<double>(), 10000, 1e-13);
  EXPECT_TRUE(tr.converged());
  EXPECT_LT(tr.final_point.norm(), 1e-12);
}

TEST(RunRPPP, ChambollePockMatchesReducedPPP) {
  Rng rng(34);
  const Matrix l = gauss(rng, 3, 4);
  const double ln = operator_norm(l);
  const auto inst = build_cp(Op::normal_cone(random_sub(rng, 4, 2)), Op::normal_cone(random_sub(rng, 3, 2)), l,
                             0.7 / ln, 1.2 / ln);
  const Vector u0 = gauss_vec(rng, 7);
  RunOptions<double> opt;
  opt.max_iters = 200;
  opt.eps = 1e-300;
  opt.store_iterates = true;
  const auto sched = LambdaSchedule<double>::constant(1.5);
  const auto p = run_ppp(inst, u0, sched, opt);
  const auto r = run_rppp(inst, inst.apply_Ct(u0), sched, opt);
  ASSERT_EQ(p.records.size(), r.records.size());
  for (std::size_t i = 0; i < p.records.size(); ++i)
    EXPECT_LT((*r.records[i].w - inst.apply_Ct(*p.records[i].u)).norm(), 1e-10);
  EXPECT_LT((p.final_shadow - r.final_shadow).norm(), 1e-10);
  opt.monitor_intertwining = true;
  EXPECT_THROW(run_rppp(inst, inst.apply_Ct(u0), sched, opt), InvalidConfig);
}

TEST(SeminormM, Examples) {
  Rng rng(35);
  const auto dr = build_dr(Op::zero(3), Op::zero(3));
  EXPECT_EQ(seminorm_M(dr, Vector(Vector::Zero(6))), 0.0);
  const Vector v = gauss_vec(rng, 3);
  EXPECT_EQ(seminorm_M(dr, vcat(v, v)), 0.0);
  const auto cp = build_cp(Op::zero(2), Op::zero(2), Matrix(Matrix::Identity(2, 2)), 1.0, 1.0);
  EXPECT_LT(seminorm_M(cp, vec({1, 0, 1, 0})), 1e-15);
}

TEST(SeminormM, SquaredEqualsQuadraticForm) {
  Rng rng(36);
  for (auto& inst : random_instances(rng)) {
    const Matrix m = inst.M();
    for (int t = 0; t < 20; ++t) {
      const Vector x = gauss_vec(rng, inst.dim_H());
      const double s = seminorm_M(inst, x);
      EXPECT_NEAR(s * s, x.dot(m * x), 1e-9);
    }
  }
}

TEST(Intertwining, RandomInstances) {
  Rng rng(37);
  for (auto& inst : random_instances(rng)) {
    const Vector u0 = gauss_vec(rng, inst.dim_H());
    EXPECT_LE(check_intertwining(inst, u0, LambdaSchedule<double>(), 50), 1e-10) << inst.label();
    EXPECT_LE(check_intertwining(inst, u0, LambdaSchedule<double>::constant(0.6), 200), 1e-9) << inst.label();
  }
}

TEST(Intertwining, ZeroOperatorsExact) {
  Rng rng(38);
  const auto inst = build_dr(Op::zero(3), Op::zero(3));
  EXPECT_EQ(check_intertwining(inst, gauss_vec(rng, 6), LambdaSchedule<double>(), 50), 0.0);
}

TEST(Intertwining, MalitskyTamFourOperators) {
  Rng rng(39);
  std::vector<Op> ops;
  for (int i = 0; i < 4; ++i) ops.push_back(Op::normal_cone(random_sub(rng, 5)));
  const auto inst = build_mt(ops);
  EXPECT_LE(check_intertwining(inst, gauss_vec(rng, inst.dim_H()), LambdaSchedule<double>(), 200), 1e-9);
}

TEST(Intertwining, NonlinearAndAffineOperators) {
  Rng rng(40);
  const auto inst = build_ryu(Op::normal_cone_point(gauss_vec(rng, 3)),
                              Op::normal_cone_affine(random_sub(rng, 3, 1), gauss_vec(rng, 3)),
                              Op::linear_monotone(Matrix(Matrix::Identity(3, 3))));
  EXPECT_LE(check_intertwining(inst, gauss_vec(rng, 15), LambdaSchedule<double>(), 200), 1e-9);
}

TEST(CoreProperties, TtildeFirmlyNonexpansive) {
  Rng rng(41);
  for (auto& inst : random_instances(rng)) {
    for (int t = 0; t < 200; ++t) {
      const Vector x = gauss_vec(rng, inst.dim_D()), y = gauss_vec(rng, inst.dim_D());
      const Vector d = apply_Ttilde(inst, x) - apply_Ttilde(inst, y);
      EXPECT_LE(d.squaredNorm(), (x - y).dot(d) + 1e-9);
    }
  }
}

TEST(CoreProperties, DisplacementIsNonincreasing) {
  Rng rng(42);
  for (auto& inst : random_instances(rng)) {
    double prev = std::numeric_limits<double>::infinity();
    run_lockstep(inst, gauss_vec(rng, inst.dim_H()), LambdaSchedule<double>::constant(1.4), 300, 0.0,
                 [&](const LockstepState<double>& s) {
                   EXPECT_LE(s.residual_w, prev + 1e-12);
                   prev = s.residual_w;
                 });
  }
}

TEST(CoreProperties, LipschitzEstimateIsFinite) {
  Rng rng(43);
  for (auto& inst : random_instances(rng)) {
    const double lip = estimate_lipschitz(inst, 50, 7);
    EXPECT_TRUE(std::isfinite(lip));
    EXPECT_GT(lip, 0.0);
  }
}

TEST(LambdaScheduleType, Validation) {
  EXPECT_EQ(LambdaSchedule<double>().at(5), 1.0);
  EXPECT_THROW(LambdaSchedule<double>::constant(0.0), InvalidConfig);
  EXPECT_THROW(LambdaSchedule<double>::constant(2.0), InvalidConfig);
  EXPECT_THROW(LambdaSchedule<double>::explicit_list({}), InvalidConfig);
  EXPECT_THROW(LambdaSchedule<double>::explicit_list({1.0, 2.5}), InvalidConfig);
  const auto s = LambdaSchedule<double>::explicit_list({0.0, 2.0, 0.5});
  EXPECT_EQ(s.at(0), 0.0);
  EXPECT_EQ(s.at(1), 2.0);
  EXPECT_EQ(s.at(2), 0.5);
  EXPECT_EQ(s.at(100), 0.5);
}

TEST(CoreTemplates, LongDoubleIteration) {
  using L = long double;
  const auto u1 = Subspace<L>::coordinate(2, std::vector<Index>{0});
  Eigen::Matrix<L, Eigen::Dynamic, 1> diag(2);
  diag << 1.0L, 1.0L;
  const auto u2 = orthonormal_basis(Eigen::Matrix<L, Eigen::Dynamic, Eigen::Dynamic>(diag));
  const auto inst = build_dr(ResolventOp<L>::normal_cone(u1), ResolventOp<L>::normal_cone(u2));
  Eigen::Matrix<L, Eigen::Dynamic, 1> w0(2);
  w0 << 3.0L, -7.0L;
  const auto tr = run_rppp(inst, w0, LambdaSchedule<L>(), 5000, L(1e-15));
  EXPECT_TRUE(tr.converged());
  EXPECT_LT(double(tr.final_point.norm()), 1e-14);
}
