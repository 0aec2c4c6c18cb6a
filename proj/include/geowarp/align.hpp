#pragma once

// Joint refinement of the two frame poses by quasi-Newton descent on the
// composite loss, plus the central-difference gradient oracle.

#include <cstdint>
#include <string_view>
#include <vector>

#include "geowarp/frame.hpp"
#include "geowarp/geometry.hpp"
#include "geowarp/loss.hpp"
#include "geowarp/parallel.hpp"

namespace geowarp {

struct AlignConfig {
  int max_iterations = 200;
  double initial_step = 1e-2;
  double step_shrink = 0.5;
  double convergence_tol = 1e-7;
  WarpMode mode = WarpMode::SelfSupervised;
  double armijo = 1e-4;
  /// Line search gives up below this step length. No descent at any longer
  /// step means the iterate sits at a kink of the loss, which counts as
  /// converged (termination line_search_stalled).
  double min_step = 1e-14;
  /// Longest accepted update of the stacked local parameters per iteration
  /// (meters and radians mixed, Euclidean norm).
  double max_update = 0.01;
  /// Curvature pairs kept for the limited-memory BFGS direction.
  int history = 10;
  /// Stop once an accepted step lowers the loss by less than this fraction
  /// of its value. The loss is not smooth at its minimum, so the gradient
  /// norm test alone rarely fires there.
  double function_tol = 2.2e-9;

  /// Throws InvalidInput on out-of-range fields.
  void validate() const;
};

enum class Termination { GradientTolerance, FunctionTolerance, MaxIterations, LineSearchStalled, Degenerate };

std::string_view to_string(Termination t);

struct AlignReport {
  bool converged = false;
  Termination termination = Termination::MaxIterations;
  int iterations = 0;
  int parameter_count = 0;  // 6 (anchored) or 12 (self-supervised)
  double final_gradient_norm = 0.0;
  LossBreakdown final_loss;
  Pose pose_prev;
  Pose pose_curr;
  std::vector<double> trajectory;  // total loss at the start and after every accepted step
};

/// Left-applies a 6-DoF increment: t <- t + delta[0..2],
/// q <- exp(delta[3..5]) * q.
Pose perturb_pose(const Pose& p, const Vec6& delta);

/// Random increment with translation norm uniform in [0, max_translation]
/// and rotation angle uniform in [0, max_rotation_rad], isotropic directions.
Vec6 random_perturbation(std::uint64_t seed, double max_translation, double max_rotation_rad);

/// Central differences of total_loss along the 12 local parameters.
Vec12 fd_gradient(const FramePair& pair, const Pose& pred_prev, const Pose& pred_curr, const LossConfig& config,
                  WarpMode mode, double step, Exec exec = Exec::Parallel);

AlignReport refine_poses(const FramePair& pair, const LossConfig& config, const AlignConfig& align,
                         const Pose& init_prev, const Pose& init_curr, Exec exec = Exec::Parallel);

}  // namespace geowarp
