#include "geowarp/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "geowarp/error.hpp"

namespace geowarp {

namespace {

Error io_error(const std::string& what, const std::filesystem::path& path) {
  return Error(ErrorCode::Io, what + ": " + path.string());
}

std::uint16_t to_u8(double v) {
  return static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

Mat4 read_pose_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open pose file", path);
  Mat4 m;
  for (int i = 0; i < 16; ++i) {
    double v = 0.0;
    if (!(in >> v) || !std::isfinite(v)) throw io_error("pose file must hold 16 finite numbers", path);
    m(i / 4, i % 4) = v;
  }
  std::string extra;
  if (in >> extra) throw io_error("trailing data in pose file", path);
  return m;
}

void write_pose_matrix(const std::filesystem::path& path, const Mat4& m) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write pose file", path);
  char buf[32];
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
      out << buf << (c == 3 ? '\n' : ' ');
    }
  }
  if (!out) throw io_error("failed writing pose file", path);
}

FrameRecord load_frame(const std::filesystem::path& rgb_path, const std::filesystem::path& depth_path,
                       const std::filesystem::path& pose_path, PoseConvention convention) {
  const PngImage rgb = read_png(rgb_path, true);
  const PngImage raw_depth = read_png(depth_path, false);
  if (rgb.width != raw_depth.width || rgb.height != raw_depth.height) {
    throw Error(ErrorCode::InvalidInput, "color and depth sizes differ: " + rgb_path.string() + " vs " +
                                             depth_path.string());
  }

  FrameRecord frame;
  std::vector<double> data(rgb.samples.size());
  std::transform(rgb.samples.begin(), rgb.samples.end(), data.begin(),
                 [](std::uint16_t s) { return s / 255.0; });
  frame.image = ImageBuffer(rgb.width, rgb.height, 3, std::move(data));

  frame.depth = DepthMap(raw_depth.width, raw_depth.height);
  for (std::size_t i = 0; i < raw_depth.samples.size(); ++i) {
    const std::uint16_t s = raw_depth.samples[i];
    if (s != 0 && s != kDepthInvalidHigh) frame.depth.set(i, s / kDepthScale);
  }

  const Mat4 m = read_pose_matrix(pose_path);
  const bool bottom_ok = std::abs(m(3, 0)) < 1e-6 && std::abs(m(3, 1)) < 1e-6 && std::abs(m(3, 2)) < 1e-6 &&
                         std::abs(m(3, 3) - 1.0) < 1e-6;
  if (!bottom_ok || orthonormality_residual(m.topLeftCorner<3, 3>()) > 1e-3) {
    throw Error(ErrorCode::InvalidPose, "pose matrix is not a rigid transform: " + pose_path.string());
  }
  RigidTransform t = RigidTransform::from_matrix(m);
  if (convention == PoseConvention::CamToWorld) t = transform_inverse(t);
  frame.pose_gt = transform_to_pose(t);
  frame.source_path = rgb_path.string();
  return frame;
}

void save_frame(const FrameRecord& frame, const std::filesystem::path& rgb_path,
                const std::filesystem::path& depth_path, const std::filesystem::path& pose_path,
                PoseConvention convention) {
  const ImageBuffer& img = frame.image;
  PngImage rgb{img.width(), img.height(), img.channels(), 8, {}};
  rgb.samples.reserve(img.data().size());
  for (double v : img.data()) rgb.samples.push_back(to_u8(v));
  write_png(rgb_path, rgb);

  const DepthMap& d = frame.depth;
  PngImage depth{d.width(), d.height(), 1, 16, std::vector<std::uint16_t>(d.pixel_count(), 0)};
  for (std::size_t i = 0; i < d.pixel_count(); ++i) {
    if (!d.valid(i)) continue;
    const double mm = std::clamp(std::round(d.depth(i) * kDepthScale), 1.0, kDepthInvalidHigh - 1.0);
    depth.samples[i] = static_cast<std::uint16_t>(mm);
  }
  write_png(depth_path, depth);

  RigidTransform t = pose_to_transform(frame.pose_gt);
  if (convention == PoseConvention::CamToWorld) t = transform_inverse(t);
  write_pose_matrix(pose_path, t.matrix());
}

std::filesystem::path frame_path(const std::filesystem::path& dir, std::size_t index, std::string_view kind) {
  char name[32];
  std::snprintf(name, sizeof name, "frame-%06zu.", index);
  return dir / (std::string(name) + std::string(kind));
}

std::vector<FrameRecord> load_sequence(const std::filesystem::path& dir, PoseConvention convention) {
  if (!std::filesystem::is_directory(dir)) throw io_error("not a directory", dir);
  std::vector<FrameRecord> frames;
  for (std::size_t i = 0;; ++i) {
    const auto color = frame_path(dir, i, "color.png");
    if (!std::filesystem::exists(color)) break;
    FrameRecord f = load_frame(color, frame_path(dir, i, "depth.png"), frame_path(dir, i, "pose.txt"), convention);
    f.frame_id = i;
    frames.push_back(std::move(f));
  }
  return frames;
}

std::pair<FrameRecord, Intrinsics> resize_frame(const FrameRecord& frame, const Intrinsics& k, int target_width,
                                                int target_height) {
  const int w = frame.image.width();
  const int h = frame.image.height();
  if (target_width <= 0 || target_height <= 0) {
    throw Error(ErrorCode::InvalidInput, "resize target dimensions must be positive");
  }
  if (target_width > w || target_height > h) {
    throw Error(ErrorCode::InvalidInput, "resize_frame only downsamples");
  }
  if (frame.depth.width() != w || frame.depth.height() != h) {
    throw Error(ErrorCode::InvalidInput, "image and depth sizes differ");
  }
  if (target_width == w && target_height == h) return {frame, k};
  const double sx = static_cast<double>(target_width) / w;
  const double sy = static_cast<double>(target_height) / h;
  const int channels = frame.image.channels();

  FrameRecord out;
  out.pose_gt = frame.pose_gt;
  out.frame_id = frame.frame_id;
  out.source_path = frame.source_path;
  out.image = ImageBuffer(target_width, target_height, channels);
  out.depth = DepthMap(target_width, target_height);
  for (int y = 0; y < target_height; ++y) {
    const double v = std::clamp((y + 0.5) / sy - 0.5, 0.0, h - 1.0);
    const int ny = std::min(static_cast<int>(std::floor((y + 0.5) / sy)), h - 1);
    for (int x = 0; x < target_width; ++x) {
      const double u = std::clamp((x + 0.5) / sx - 0.5, 0.0, w - 1.0);
      const BilinearSample s = bilinear_sample(frame.image, Vec2(u, v));
      for (int c = 0; c < channels; ++c) out.image.at(x, y, c) = s.value[c];
      const int nx = std::min(static_cast<int>(std::floor((x + 0.5) / sx)), w - 1);
      if (frame.depth.valid(nx, ny)) out.depth.set(x, y, frame.depth.depth(nx, ny));
    }
  }

  Intrinsics kk = k;
  kk.fx = k.fx * sx;
  kk.fy = k.fy * sy;
  kk.cx = (k.cx + 0.5) * sx - 0.5;
  kk.cy = (k.cy + 0.5) * sy - 0.5;
  kk.width = target_width;
  kk.height = target_height;
  return {std::move(out), kk};
}

DepthMap sparsify_depth(const DepthMap& depth, double remove_fraction, std::uint64_t seed) {
  if (!(remove_fraction >= 0.0 && remove_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidInput, "remove_fraction must lie in [0, 1]");
  }
  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < depth.pixel_count(); ++i) {
    if (depth.valid(i)) valid.push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(valid.begin(), valid.end(), rng);
  const auto remove = static_cast<std::size_t>(std::llround(remove_fraction * static_cast<double>(valid.size())));
  DepthMap out = depth;
  for (std::size_t j = 0; j < remove; ++j) out.invalidate(valid[j]);
  return out;
}

DepthMap range_filter(const DepthMap& depth, double max_depth) {
  if (!(max_depth > 0.0)) throw Error(ErrorCode::InvalidInput, "max_depth must be positive");
  DepthMap out = depth;
  for (std::size_t i = 0; i < out.pixel_count(); ++i) {
    if (out.valid(i) && out.depth(i) >= max_depth) out.invalidate(i);
  }
  return out;
}

std::vector<FramePair> pair_frames(const std::vector<FrameRecord>& sequence, std::size_t stride, const Intrinsics& k) {
  if (stride < 1) throw Error(ErrorCode::InvalidInput, "stride must be at least 1");
  std::vector<FramePair> pairs;
  for (std::size_t i = 0; i + stride < sequence.size(); ++i) {
    const FrameRecord& a = sequence[i];
    const FrameRecord& b = sequence[i + stride];
    FramePair p;
    p.image_prev = a.image;
    p.image_curr = b.image;
    p.depth_prev = a.depth;
    p.mask = PixelMask(k.width, k.height, true);
    p.intrinsics = k;
    p.gt_prev = a.pose_gt;
    p.gt_curr = b.pose_gt;
    p.index_prev = a.frame_id;
    p.index_curr = b.frame_id;
    p.validate();
    pairs.push_back(std::move(p));
  }
  return pairs;
}

}  // namespace geowarp
