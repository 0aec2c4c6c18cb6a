#pragma once

#include <cstddef>

#include "geowarp/geometry.hpp"
#include "geowarp/imaging.hpp"

namespace geowarp {

/// Two consecutive frames with depth on the earlier one and ground-truth
/// world-to-camera poses for both.
struct FramePair {
  ImageBuffer image_prev;
  ImageBuffer image_curr;
  DepthMap depth_prev;
  PixelMask mask;  // external keep-mask on the previous grid (e.g. moving objects)
  Intrinsics intrinsics;
  Pose gt_prev;
  Pose gt_curr;
  std::size_t index_prev = 0;
  std::size_t index_curr = 1;

  /// Throws InvalidInput when any buffer disagrees with the intrinsics size
  /// or the two images have different channel counts.
  void validate() const;
};

}  // namespace geowarp
