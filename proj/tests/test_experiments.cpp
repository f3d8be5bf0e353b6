#include <gtest/gtest.h>

#include "helpers.hpp"
#include "ppp/experiments.hpp"

using namespace ppp;
using namespace testing_support;

namespace {

using Op = ResolventOp<double>;

/// Minimum-norm point of U ∩ L^{-1}(b) for a coordinate subspace U, by SVD least squares.
Vector affine_min_norm(const PhantomProblem& p) {
  const Matrix lb = p.L * p.U.basis();
  const Vector c = lb.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(p.b);
  return p.U.basis() * c;
}

}  // namespace

TEST(UniformAngles, Values) {
  const auto a = uniform_angles(4);
  ASSERT_EQ(a.size(), 4u);
  EXPECT_EQ(a[0], 0.0);
  EXPECT_NEAR(a[2], pi / 2, 1e-15);
  EXPECT_THROW(uniform_angles(0), InvalidConfig);
}

TEST(MakePhantom, SingleAngleGeometry) {
  const auto p = make_phantom(8, {0.0}, 8, 0);
  EXPECT_EQ(p.L.rows(), 8);
  EXPECT_EQ(p.L.cols(), 64);
  EXPECT_GE(p.L.minCoeff(), 0.0);
  for (Index r = 0; r < p.L.rows(); ++r) EXPECT_LE(p.L.row(r).sum(), 8 * std::sqrt(2.0) + 1e-12);
  // A horizontal ray through a row centre crosses 8 unit cells.
  EXPECT_NEAR(p.L.row(3).sum(), 8.0, 1e-12);
}

TEST(MakePhantom, DiagonalRaysStayWithinBound) {
  const auto p = make_phantom(8, {pi / 4, 3 * pi / 4, 0.3}, 11, 0);
  EXPECT_GE(p.L.minCoeff(), 0.0);
  for (Index r = 0; r < p.L.rows(); ++r) EXPECT_LE(p.L.row(r).sum(), 8 * std::sqrt(2.0) + 1e-12);
}

TEST(MakePhantom, PriorAndConsistency) {
  for (std::uint64_t seed : {0u, 1u, 17u}) {
    const auto p = make_phantom(12, uniform_angles(6), 10, seed);
    const int n = p.grid_side;
    for (int r = 0; r < n; ++r)
      for (int c : {0, 1, n - 2, n - 1}) EXPECT_EQ(p.x_true(Index(r) * n + c), 0.0);
    EXPECT_EQ(p.b, p.L * p.x_true);
    EXPECT_EQ(membership_residual(p.U, p.x_true), 0.0);
    EXPECT_EQ(p.U.rank(), Index(n) * (n - 4));
    EXPECT_GT(p.x_true.maxCoeff(), 1.5);
  }
}

TEST(MakePhantom, Errors) {
  EXPECT_THROW(make_phantom(7, {0.0}, 8, 0), InvalidConfig);
  EXPECT_THROW(make_phantom(8, {}, 8, 0), InvalidConfig);
  EXPECT_THROW(make_phantom(8, {0.0}, 0, 0), InvalidConfig);
}

TEST(RunPhantom, ZeroIterationsReportsPredictionNorm) {
  const auto p = make_phantom(8, uniform_angles(4), 8, 3);
  const auto rep = run_phantom(p, 0);
  ASSERT_EQ(rep.history.size(), 1u);
  EXPECT_EQ(rep.iterations, 0);
  EXPECT_NEAR(rep.final_error, rep.predicted.norm(), 1e-15);
  EXPECT_LT((rep.predicted - affine_min_norm(p)).norm(), 1e-8);
}

TEST(RunPhantom, StepSizesFromNormalMatrix) {
  const auto p = make_phantom(8, uniform_angles(4), 8, 3);
  const auto rep = run_phantom(p, 1);
  const double ln = Eigen::JacobiSVD<Matrix>(p.L).singularValues()(0);
  EXPECT_NEAR(rep.sigma, 0.99 / ln, 1e-12);
  EXPECT_NEAR(rep.tau, 0.99 / ln, 1e-12);
}

TEST(RunPhantom, SmallProblemConverges) {
  const auto p = make_phantom(8, uniform_angles(8), 12, 5);
  const auto rep = run_phantom(p, 8000, 1.0, 50);
  EXPECT_LT(rep.final_error, 1e-4);
  for (const auto& row : rep.history) EXPECT_TRUE(std::isfinite(row.u_err));
  // The shadow error oscillates; its running maximum over the tail still decays.
  const std::size_t start = rep.history.size() / 10;
  double tail_max = 0;
  for (std::size_t i = rep.history.size() / 2; i < rep.history.size(); ++i)
    tail_max = std::max(tail_max, rep.history[i].u_err);
  EXPECT_LT(tail_max, rep.history[start].u_err);
  EXPECT_EQ(rep.history.back().k, 8000);
  EXPECT_EQ(rep.history[1].k, 50);
  EXPECT_EQ(rep.final_image.size(), 64);
}

TEST(RunPhantom, FejerMonotoneInSeminorm) {
  const auto p = make_phantom(8, uniform_angles(8), 12, 5);
  const auto rep = run_phantom(p, 1, 1.0, 1);
  const auto inst = build_cp(Op::normal_cone(p.U), Op::normal_cone_point(p.b), p.L, rep.sigma, rep.tau);
  const Vector u_star = vcat(rep.predicted, Vector(Vector::Zero(p.L.rows())));
  EXPECT_LT((apply_T(inst, u_star) - u_star).norm(), 1e-9);
  double prev = std::numeric_limits<double>::infinity();
  run_lockstep(inst, Vector(Vector::Zero(inst.dim_H())), LambdaSchedule<double>(), 3000, 0.0,
               [&](const LockstepState<double>& s) {
                 const double d = seminorm_M(inst, Vector(s.u - u_star));
                 EXPECT_LE(d, prev + 1e-12) << s.k;
                 prev = d;
               });
}

TEST(RunPhantom, Reproducible) {
  const auto a = run_phantom(make_phantom(8, uniform_angles(5), 9, 11), 300, 1.0, 7);
  const auto b = run_phantom(make_phantom(8, uniform_angles(5), 9, 11), 300, 1.0, 7);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].k, b.history[i].k);
    EXPECT_EQ(a.history[i].u_err, b.history[i].u_err);
    EXPECT_EQ(a.history[i].residual, b.history[i].residual);
  }
  EXPECT_EQ(a.final_image, b.final_image);
}

TEST(RunPhantom, Errors) {
  const auto p = make_phantom(8, {0.0}, 8, 0);
  EXPECT_THROW(run_phantom(p, -1), InvalidConfig);
  EXPECT_THROW(run_phantom(p, 10, 1.0, 0), InvalidConfig);
}

TEST(ConvergenceStudy, StartAtLimit) {
  Rng rng(111);
  const auto u1 = random_sub(rng, 5), u2 = random_sub(rng, 5);
  const auto inst = build_dr(Op::normal_cone(u1), Op::normal_cone(u2));
  const auto ref = dr_fix_and_limits(u1, u2, gauss_vec(rng, 10)).limit;
  const auto rep = convergence_study(inst, ref.u_star, LambdaSchedule<double>(), 50, ref);
  for (const auto& row : rep.history) {
    EXPECT_LE(row.w_err, 1e-12);
    EXPECT_LE(row.u_err, 1e-12);
  }
  ASSERT_TRUE(rep.first_k_below.has_value());
  EXPECT_EQ(*rep.first_k_below, 0);
}

TEST(ConvergenceStudy, DouglasRachfordHighDimension) {
  Rng rng(112);
  const auto u1 = random_sub(rng, 20, 6), u2 = random_sub(rng, 20, 9);
  const auto inst = build_dr(Op::normal_cone(u1), Op::normal_cone(u2));
  const Vector u0 = gauss_vec(rng, 40);
  const auto ref = dr_fix_and_limits(u1, u2, u0).limit;
  const auto rep = convergence_study(inst, u0, LambdaSchedule<double>(), 5000, ref, 100);
  ASSERT_TRUE(rep.first_k_below.has_value());
  EXPECT_LE(*rep.first_k_below, 5000);
  EXPECT_LE(rep.history.back().w_err, 1e-6);
  EXPECT_EQ(rep.history.back().k, 5000);
}

TEST(ConvergenceStudy, MalitskyTamFejerMonotone) {
  Rng rng(113);
  std::vector<Subspace<double>> us;
  std::vector<Op> ops;
  for (int i = 0; i < 4; ++i) {
    us.push_back(random_sub(rng, 6, 4));
    ops.push_back(Op::normal_cone(us.back()));
  }
  const auto inst = build_mt(ops);
  const Vector u0 = gauss_vec(rng, inst.dim_H());
  const auto closed = mt_fix_and_projection(us, u0);
  const LimitPrediction<double> ref{closed.w_star, closed.m_projection};
  const auto rep = convergence_study(inst, u0, LambdaSchedule<double>(), 2000, ref);
  ASSERT_EQ(rep.history.size(), 2001u);
  for (std::size_t i = 1; i < rep.history.size(); ++i)
    EXPECT_LE(rep.history[i].w_err, rep.history[i - 1].w_err + 1e-12) << i;
  for (const auto& row : rep.history) EXPECT_LE(row.intertwine, 1e-9);
}
