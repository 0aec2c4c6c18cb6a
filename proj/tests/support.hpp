#pragma once

// Shared fixtures for the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <numbers>
#include <random>

#include "geowarp/align.hpp"
#include "geowarp/synth.hpp"
#include "geowarp/warp.hpp"

namespace geowarp::test {

/// Fresh directory under the system temp dir, removed on destruction.
struct ScratchDir {
  std::filesystem::path path;
  explicit ScratchDir(const std::string& name)
      : path(std::filesystem::temp_directory_path() / ("geowarp_test_" + name)) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~ScratchDir() { std::filesystem::remove_all(path); }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
};

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

/// Tilted textured plane seen from the origin and from a second camera
/// displaced by `motion` meters in a seeded direction with a small rotation.
inline FramePair plane_pair(std::uint64_t seed, double motion = 0.03, int channels = 1,
                            const SceneOptions& base = {}) {
  SceneOptions so = base;
  so.seed = seed;
  const SyntheticScene scene = make_plane_scene(so);
  std::mt19937_64 rng(seed * 7 + 1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Pose gp = pose_from_camera_center(Vec3::Zero(), Quat::Identity());
  Vec3 c(u(rng), u(rng), u(rng));
  c = c.normalized() * motion;
  const Vec3 omega(u(rng), u(rng), u(rng));
  const Pose gc = pose_from_camera_center(c, quat_exp(omega * 0.005));
  return make_pair(scene, gp, gc, {}, channels);
}

/// Keep-mask that removes every pixel where the loss is not smooth in the
/// poses: warped coordinates within `margin` of an integer grid line (the
/// bilinear kink, which includes the image border), flow within `margin` of
/// the gate, and residuals within `resid` of zero (the L1 kink).
inline PixelMask smooth_region_mask(const FramePair& pair, const Pose& pp, const Pose& pc, double h,
                                    double margin = 1e-2, double resid = 1e-3) {
  const Intrinsics& k = pair.intrinsics;
  PixelMask m(k.width, k.height, true);
  const RigidTransform rel = relative_transform(pose_to_transform(pp), pose_to_transform(pc));
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      if (!pair.depth_prev.valid(x, y)) continue;
      const WarpedPixel w = warp_pixel(Vec2(x, y), pair.depth_prev.depth(x, y), rel, k);
      const double fu = std::abs(w.u_curr.x() - std::round(w.u_curr.x()));
      const double fv = std::abs(w.u_curr.y() - std::round(w.u_curr.y()));
      const double flow = std::abs(w.u_curr.x() - x) + std::abs(w.u_curr.y() - y);
      bool drop = !w.in_front || fu < margin || fv < margin || std::abs(flow - h) < margin;
      if (!drop) {
        const BilinearSample s = bilinear_sample(pair.image_curr, w.u_curr);
        if (s.in_bounds) {
          double r = 0.0;
          for (int c = 0; c < pair.image_prev.channels(); ++c) r += s.value[c] - pair.image_prev.at(x, y, c);
          drop = std::abs(r) < resid;
        }
      }
      if (drop) m.set(x, y, false);
    }
  }
  return m;
}

inline double worst_relative_error(const Vec12& analytic, const Vec12& reference, double floor = 1e-9) {
  double worst = 0.0;
  for (int j = 0; j < 12; ++j) {
    worst = std::max(worst, std::abs(analytic[j] - reference[j]) / std::max(std::abs(reference[j]), floor));
  }
  return worst;
}

inline ImageBuffer random_image(std::mt19937_64& rng, int w, int h, int channels = 1) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ImageBuffer img(w, h, channels);
  for (double& v : img.data()) v = u(rng);
  return img;
}

}  // namespace geowarp::test
