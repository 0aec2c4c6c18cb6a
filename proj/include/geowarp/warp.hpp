#pragma once

// Depth-driven image warping. Every previous-frame pixel with valid depth is
// lifted to 3-D, moved into the current camera by the relative transform,
// projected, and the current image is bilinearly sampled there. The result
// lives on the previous frame's pixel grid.

#include <cstddef>
#include <vector>

#include "geowarp/geometry.hpp"
#include "geowarp/imaging.hpp"
#include "geowarp/parallel.hpp"

namespace geowarp {

struct WarpedPixel {
  Vec2 u_curr = Vec2::Zero();
  double z_curr = 0.0;
  bool in_front = false;  // false when the transformed point has z <= 0
};

/// K * T_rel * (depth * K^-1 * u_prev). Throws InvalidDepth when depth <= 0.
WarpedPixel warp_pixel(const Vec2& u_prev, double depth, const RigidTransform& rel, const Intrinsics& k);

struct WarpOptions {
  Exec exec = Exec::Parallel;
  /// Keep per-pixel transformed points and image derivatives for gradients.
  bool keep_geometry = false;
};

struct WarpResult {
  ImageBuffer warped;             // I_t sampled on the previous grid; 0 where invalid
  PixelMask validity;             // depth valid, ext mask kept, z > 0, sample in bounds
  std::vector<double> flow_l1;    // |u_t - u_{t-1}|_1, 0 where invalid
  std::vector<Vec2> coords;       // sample coordinate u_t (geometry only)
  std::vector<Vec3> points_cam_t; // transformed point (geometry only)
  std::vector<double> grad_u;     // d I_t / d u at u_t, pixel-major x channel (geometry only)
  std::vector<double> grad_v;

  bool has_geometry() const noexcept { return !points_cam_t.empty(); }
};

/// Throws InvalidInput when image, depth, mask and intrinsics disagree on size.
WarpResult warp_image(const ImageBuffer& current, const DepthMap& depth_prev, const RigidTransform& rel,
                      const Intrinsics& k, const PixelMask& ext_mask, const WarpOptions& options = {});

}  // namespace geowarp
