#pragma once

// Desk-scale tomography experiment and generic convergence studies.

#include <cstdint>
#include <optional>
#include <vector>

#include "ppp/limits.hpp"
#include "ppp/ppp_core.hpp"

namespace ppp {

/// A consistent system L x = b from line integrals through a synthetic
/// image, with the prior that the first and last two image columns are zero.
struct PhantomProblem {
  int grid_side = 0;
  std::vector<double> angles;
  int rays_per_angle = 0;
  /// One row per ray, one column per pixel; pixel (r, c) has index r * grid_side + c.
  Matrix L;
  Vector b;
  Vector x_true;
  Subspace<double> U;
};

/// Angles k·π/count for k = 0..count-1.
std::vector<double> uniform_angles(int count);

/// Two nested ellipses (intensities 1 and 2) whose placement is jittered by
/// `seed`, traced by `rays_per_angle` parallel rays per angle spanning the grid width.
PhantomProblem make_phantom(int grid_side, const std::vector<double>& angles, int rays_per_angle,
                            std::uint64_t seed);

struct TraceRow {
  Index k = 0;
  double residual = 0;
  double w_err = 0;
  double u_err = 0;
  double intertwine = 0;
};

struct ExperimentReport {
  Index iterations = 0;
  /// Phantom: |P_U(x_k - σ L^T y_k) - x_pred|. Study: max(|w_k - w*|, |T u_k - u*|).
  double final_error = 0;
  /// Phantom rows carry the shadow error in u_err and leave w_err, intertwine at 0.
  std::vector<TraceRow> history;
  /// First k at which the tracked error reached 1e-6.
  std::optional<Index> first_k_below;
  double wall_seconds = 0;
  double sigma = 0, tau = 0;
  /// Phantom: final shadow image and the predicted limit.
  Vector final_image;
  Vector predicted;
};

/// Chambolle-Pock with A1 = N_U, A2 = N_{b}, σ = τ = 0.99/|L| (|L|² = |L^T L|),
/// started at (0, 0). Records every `record_stride`-th iteration and the last one.
ExperimentReport run_phantom(const PhantomProblem& p, Index iters, double lambda = 1.0, Index record_stride = 100);

/// PPP and rPPP in lockstep from u0, logging |w_k - w*| and |T u_k - u*| every `record_stride` iterations.
ExperimentReport convergence_study(const PPPInstance<double>& inst, const Vector& u0,
                                   const LambdaSchedule<double>& sched, Index iters,
                                   const LimitPrediction<double>& reference, Index record_stride = 1);

}  // namespace ppp
