#include "geowarp/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "geowarp/error.hpp"

namespace geowarp {

double SyntheticScene::texture(const Vec2& st) const {
  double v = base;
  for (const TextureWave& w : waves) {
    v += w.amplitude * std::sin(2.0 * std::numbers::pi * w.frequency.dot(st) + w.phase);
  }
  return v;
}

Vec2 SyntheticScene::texture_gradient(const Vec2& st) const {
  Vec2 g = Vec2::Zero();
  for (const TextureWave& w : waves) {
    g += w.amplitude * 2.0 * std::numbers::pi * std::cos(2.0 * std::numbers::pi * w.frequency.dot(st) + w.phase) *
         w.frequency;
  }
  return g;
}

double SyntheticScene::intensity_at(const Vec3& world) const {
  const Vec3 d = world - origin;
  return texture(Vec2(axis_s.dot(d), axis_t.dot(d)));
}

SyntheticScene make_plane_scene(const SceneOptions& options) {
  options.intrinsics.validate();
  if (!(options.distance > 0.0) || options.wave_count < 1 || !(options.min_period_px > 0.0) ||
      options.max_period_px < options.min_period_px || !(options.contrast >= 0.0) || options.contrast > 0.5) {
    throw Error(ErrorCode::InvalidInput, "invalid synthetic scene options");
  }
  SyntheticScene scene;
  scene.intrinsics = options.intrinsics;
  scene.seed = options.seed;

  const Mat3 tilt = Eigen::AngleAxisd(options.tilt_deg * std::numbers::pi / 180.0, Vec3::UnitX()).toRotationMatrix();
  scene.normal = tilt * Vec3::UnitZ();
  scene.axis_s = tilt * Vec3::UnitX();
  scene.axis_t = tilt * Vec3::UnitY();
  scene.origin = Vec3(0.0, 0.0, options.distance);
  scene.offset = scene.normal.dot(scene.origin);

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double meters_per_px = options.distance / options.intrinsics.fx;
  std::vector<double> weights(options.wave_count);
  double weight_sum = 0.0;
  for (double& w : weights) {
    w = 0.5 + unit(rng);
    weight_sum += w;
  }
  for (int k = 0; k < options.wave_count; ++k) {
    TextureWave wave;
    const double period_px = options.min_period_px + unit(rng) * (options.max_period_px - options.min_period_px);
    const double angle = 2.0 * std::numbers::pi * unit(rng);
    wave.frequency = Vec2(std::cos(angle), std::sin(angle)) / (period_px * meters_per_px);
    wave.phase = 2.0 * std::numbers::pi * unit(rng);
    wave.amplitude = options.contrast * weights[k] / weight_sum;
    scene.waves.push_back(wave);
  }
  return scene;
}

RenderedView render_view(const SyntheticScene& scene, const Pose& pose, int channels) {
  const Intrinsics& k = scene.intrinsics;
  k.validate();
  const RigidTransform t = pose_to_transform(pose);
  const Mat3 rt = t.rotation.transpose();
  const Vec3 center = -rt * t.translation;
  const double center_side = scene.offset - scene.normal.dot(center);

  RenderedView view{ImageBuffer(k.width, k.height, channels), DepthMap(k.width, k.height)};
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const Vec3 ray = rt * Vec3((x - k.cx) / k.fx, (y - k.cy) / k.fy, 1.0);
      const double lambda = center_side / scene.normal.dot(ray);
      if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw Error(ErrorCode::InvalidPlacement, "plane is not in front of the camera at every pixel");
      }
      view.depth.set(x, y, lambda);
      const double v = scene.intensity_at(center + lambda * ray);
      if (channels == 1) {
        view.image.at(x, y) = v;
      } else {
        view.image.at(x, y, 0) = v;
        view.image.at(x, y, 1) = 0.8 * v + 0.1;
        view.image.at(x, y, 2) = 1.0 - v;
      }
    }
  }
  return view;
}

FramePair make_pair(const SyntheticScene& scene, const Pose& pose_prev, const Pose& pose_curr,
                    const PairNoise& noise, int channels) {
  RenderedView prev = render_view(scene, pose_prev, channels);
  RenderedView curr = render_view(scene, pose_curr, channels);

  std::mt19937_64 rng(noise.seed);
  if (noise.depth_std > 0.0) {
    std::normal_distribution<double> n(0.0, noise.depth_std);
    for (std::size_t i = 0; i < prev.depth.pixel_count(); ++i) prev.depth.set(i, prev.depth.depth(i) + n(rng));
  }
  if (noise.intensity_std > 0.0) {
    std::normal_distribution<double> n(0.0, noise.intensity_std);
    for (double& v : prev.image.data()) v += n(rng);
    for (double& v : curr.image.data()) v += n(rng);
    prev.image.clamp_unit();
    curr.image.clamp_unit();
  }

  FramePair pair;
  pair.image_prev = std::move(prev.image);
  pair.image_curr = std::move(curr.image);
  pair.depth_prev = std::move(prev.depth);
  pair.mask = PixelMask(scene.intrinsics.width, scene.intrinsics.height, true);
  pair.intrinsics = scene.intrinsics;
  pair.gt_prev = pose_prev;
  pair.gt_curr = pose_curr;
  return pair;
}

Pose pose_from_camera_center(const Vec3& center, const Quat& cam_to_world) {
  const Quat q = quat_normalize(cam_to_world).conjugate();
  return Pose(-(q * center), q);
}

}  // namespace geowarp
