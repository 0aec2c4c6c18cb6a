#pragma once

// Composite loss: Euclidean pose loss, masked photometric L1 with the
// flow-magnitude admission gate, global-statistics SSIM loss, and their
// weighted sum, with analytic gradients w.r.t. local pose increments.

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "geowarp/frame.hpp"
#include "geowarp/geometry.hpp"
#include "geowarp/imaging.hpp"
#include "geowarp/parallel.hpp"
#include "geowarp/warp.hpp"

namespace geowarp {

using Vec12 = Eigen::Matrix<double, 12, 1>;

struct LossWeights {
  double beta = 3.0;       // orientation weight inside the pose loss
  double lambda_d = 1.0;   // pose loss weight
  double lambda_p = 0.01;  // photometric loss weight
  double lambda_s = 0.1;   // SSIM loss weight
  double h = 10.0;         // flow gate, pixels (L1)
  double c1 = 0.01 * 0.01;
  double c2 = 0.03 * 0.03;

  /// Throws InvalidInput on negative weights or non-positive h, c1, c2.
  void validate() const;
};

enum class PhotometricNorm { Sum, Mean };
enum class ChannelMode { Grayscale, PerChannel };

/// Which poses drive the warp. Anchored warps with the ground-truth current
/// pose; SelfSupervised warps with both predicted poses.
enum class WarpMode { Anchored, SelfSupervised };

struct LossOptions {
  PhotometricNorm norm = PhotometricNorm::Sum;
  ChannelMode channels = ChannelMode::Grayscale;
  /// Fraction of surviving pixels with the largest residuals to ignore.
  /// 0 disables the rejection.
  double reject_fraction = 0.0;
};

struct LossConfig {
  LossWeights weights;
  LossOptions options;
};

struct LossBreakdown {
  double l_d = 0.0;
  double l_p = 0.0;
  double l_s = 0.0;
  double total = 0.0;
  std::size_t valid_pixel_count = 0;     // pixels surviving the full mask
  std::size_t gated_pixel_count = 0;     // valid warps excluded by the flow gate
  std::size_t rejected_pixel_count = 0;  // excluded by the large-residual cutoff
  bool degenerate = false;               // no surviving pixels: l_p and l_s dropped
  bool ssim_degenerate = false;          // fewer than 2 pixels: l_s dropped
};

/// One frame's ||x - x_hat|| + beta * ||q - q_hat||.
double frame_pose_loss(const Pose& pred, const Pose& gt, double beta);

double euclidean_pose_loss(const Pose& pred_prev, const Pose& gt_prev, const Pose& pred_curr, const Pose& gt_curr,
                           double beta);

struct PhotometricResult {
  double value = 0.0;
  std::vector<double> residuals;  // channel-averaged |warped - comparison|, 0 outside the mask
  PixelMask mask;                 // validity AND gate AND not rejected
  std::size_t count = 0;
  std::size_t gated = 0;
  std::size_t rejected = 0;
  bool degenerate = false;
};

/// Masked L1 between the warped image and the comparison image, which lives
/// on the same (previous-frame) grid.
PhotometricResult photometric_loss(const ImageBuffer& comparison, const WarpResult& warp, const LossWeights& weights,
                                   const LossOptions& options = {});

/// Global-statistics SSIM; multi-channel images average the per-channel value.
double ssim(const ImageBuffer& a, const ImageBuffer& b, const PixelMask& mask, double c1, double c2);

/// (1 - SSIM) / 2 over the photometric mask. Throws DegenerateStatistics with
/// fewer than 2 surviving pixels.
double ssim_loss(const ImageBuffer& comparison, const WarpResult& warp, const LossWeights& weights,
                 const LossOptions& options = {});

/// Layout of the 12 local parameters: previous frame translation (0..2) and
/// rotation (3..5), then current frame translation (6..8) and rotation (9..11).
/// Increments are applied on the left: R <- exp(w) R, t <- t + dt.
inline constexpr int kPrevOffset = 0;
inline constexpr int kCurrOffset = 6;

LossBreakdown total_loss(const FramePair& pair, const Pose& pred_prev, const Pose& pred_curr, const LossConfig& config,
                         WarpMode mode, Exec exec = Exec::Parallel);

struct LossGradient {
  LossBreakdown loss;
  Vec12 gradient = Vec12::Zero();
};

/// Analytic gradient of total_loss. The validity mask, flow gate and residual
/// rejection are fixed selections for the evaluation (no gradient through
/// them). Non-differentiable points (zero residual, zero pose error) use the
/// zero subgradient.
LossGradient total_loss_gradient(const FramePair& pair, const Pose& pred_prev, const Pose& pred_curr,
                                 const LossConfig& config, WarpMode mode, Exec exec = Exec::Parallel);

}  // namespace geowarp
