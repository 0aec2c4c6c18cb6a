#include "geowarp/warp.hpp"

#include <cmath>

#include "geowarp/error.hpp"

namespace geowarp {

WarpedPixel warp_pixel(const Vec2& u_prev, double depth, const RigidTransform& rel, const Intrinsics& k) {
  const Vec3 p = rel * backproject(u_prev, depth, k);
  WarpedPixel out;
  out.z_curr = p.z();
  out.in_front = p.z() > 0.0;
  if (out.in_front) out.u_curr = project(p, k);
  return out;
}

namespace {

void warp_row(int y, const ImageBuffer& current, const DepthMap& depth, const RigidTransform& rel,
              const Intrinsics& k, const PixelMask& ext_mask, WarpResult& out) {
  const int w = current.width();
  const int nc = current.channels();
  const bool geometry = out.has_geometry();
  auto warped = out.warped.data();

  for (int x = 0; x < w; ++x) {
    const std::size_t i = static_cast<std::size_t>(y) * w + x;
    if (!depth.valid(i) || !ext_mask.keep(i)) continue;

    const Vec3 p = rel * backproject(Vec2(x, y), depth.depth(i), k);
    if (!(p.z() > 0.0)) continue;
    const Vec2 u(k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy);

    const BilinearSample s = bilinear_sample(current, u);
    if (!s.in_bounds) continue;

    out.validity.set(i, true);
    out.flow_l1[i] = std::abs(u.x() - x) + std::abs(u.y() - y);
    for (int c = 0; c < nc; ++c) warped[i * nc + c] = s.value[c];
    if (geometry) {
      out.coords[i] = u;
      out.points_cam_t[i] = p;
      for (int c = 0; c < nc; ++c) {
        out.grad_u[i * nc + c] = s.d_du[c];
        out.grad_v[i * nc + c] = s.d_dv[c];
      }
    }
  }
}

}  // namespace

WarpResult warp_image(const ImageBuffer& current, const DepthMap& depth_prev, const RigidTransform& rel,
                      const Intrinsics& k, const PixelMask& ext_mask, const WarpOptions& options) {
  k.validate();
  const int w = current.width();
  const int h = current.height();
  if (depth_prev.width() != w || depth_prev.height() != h || ext_mask.width() != w ||
      ext_mask.height() != h || k.width != w || k.height != h) {
    throw Error(ErrorCode::InvalidInput, "warp_image: image, depth, mask and intrinsics sizes differ");
  }

  const std::size_t n = current.pixel_count();
  const std::size_t nc = static_cast<std::size_t>(current.channels());
  WarpResult out;
  out.warped = ImageBuffer(w, h, current.channels(), 0.0);
  out.validity = PixelMask(w, h, false);
  out.flow_l1.assign(n, 0.0);
  if (options.keep_geometry) {
    out.coords.assign(n, Vec2::Zero());
    out.points_cam_t.assign(n, Vec3::Zero());
    out.grad_u.assign(n * nc, 0.0);
    out.grad_v.assign(n * nc, 0.0);
  }

  if (options.exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) warp_row(y, current, depth_prev, rel, k, ext_mask, out);
  } else {
    for (int y = 0; y < h; ++y) warp_row(y, current, depth_prev, rel, k, ext_mask, out);
  }
  return out;
}

}  // namespace geowarp
