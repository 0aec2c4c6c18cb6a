#pragma once

// Procedural textured-plane scenes with exact depth and exact rendering,
// used as the ground-truth oracle for warping, losses and pose recovery.

#include <cstdint>
#include <vector>

#include "geowarp/frame.hpp"
#include "geowarp/geometry.hpp"
#include "geowarp/imaging.hpp"

namespace geowarp {

struct TextureWave {
  double amplitude = 0.0;
  Vec2 frequency = Vec2::Zero();  // cycles per meter along the plane axes
  double phase = 0.0;
};

struct SyntheticScene {
  // plane: normal . X = offset (world frame); normal is unit length
  Vec3 normal = Vec3::UnitZ();
  double offset = 2.0;
  Vec3 origin = Vec3(0.0, 0.0, 2.0);  // texture origin, on the plane
  Vec3 axis_s = Vec3::UnitX();        // orthonormal texture axes spanning the plane
  Vec3 axis_t = Vec3::UnitY();
  double base = 0.5;
  std::vector<TextureWave> waves;
  Intrinsics intrinsics;
  std::uint64_t seed = 0;

  /// Smooth intensity at plane coordinates (s, t); always inside [0, 1].
  double texture(const Vec2& st) const;
  Vec2 texture_gradient(const Vec2& st) const;
  /// Texture intensity at a world point assumed to lie on the plane.
  double intensity_at(const Vec3& world) const;
};

struct SceneOptions {
  Intrinsics intrinsics{80.0, 80.0, 79.5, 59.5, 160, 120};
  double distance = 4.0;   // plane distance along the world z axis
  double tilt_deg = 20.0;  // plane tilt about the world x axis
  int wave_count = 5;
  /// Wave periods, in pixels at the plane distance. The shortest period stays
  /// well above 8 px (a quarter of the Nyquist frequency).
  double min_period_px = 32.0;
  double max_period_px = 64.0;
  double contrast = 0.45;  // sum of wave amplitudes
  std::uint64_t seed = 0;
};

SyntheticScene make_plane_scene(const SceneOptions& options);

struct RenderedView {
  ImageBuffer image;
  DepthMap depth;
};

/// Exact per-pixel ray/plane intersection and analytic texture lookup.
/// channels = 3 produces a smooth tinted RGB rendering of the same texture.
/// Throws InvalidPlacement when any pixel ray misses the plane in front of
/// the camera.
RenderedView render_view(const SyntheticScene& scene, const Pose& pose, int channels = 1);

struct PairNoise {
  double depth_std = 0.0;      // meters
  double intensity_std = 0.0;  // on the [0, 1] scale, applied to both images
  std::uint64_t seed = 0;
};

FramePair make_pair(const SyntheticScene& scene, const Pose& pose_prev, const Pose& pose_curr,
                    const PairNoise& noise = {}, int channels = 1);

/// Camera pose (world-to-camera) of a camera at `center` with rotation
/// `orientation` (camera-to-world), the usual way trajectories are authored.
Pose pose_from_camera_center(const Vec3& center, const Quat& cam_to_world);

}  // namespace geowarp
