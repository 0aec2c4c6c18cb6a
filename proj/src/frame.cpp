#include "geowarp/frame.hpp"

#include "geowarp/error.hpp"

namespace geowarp {

void FramePair::validate() const {
  intrinsics.validate();
  const int w = intrinsics.width;
  const int h = intrinsics.height;
  const auto same = [&](int bw, int bh) { return bw == w && bh == h; };
  if (!same(image_prev.width(), image_prev.height()) || !same(image_curr.width(), image_curr.height()) ||
      !same(depth_prev.width(), depth_prev.height()) || !same(mask.width(), mask.height())) {
    throw Error(ErrorCode::InvalidInput, "frame pair buffers do not match the intrinsics size");
  }
  if (image_prev.channels() != image_curr.channels()) {
    throw Error(ErrorCode::InvalidInput, "frame pair images have different channel counts");
  }
}

}  // namespace geowarp
