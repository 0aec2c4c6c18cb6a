#pragma once

// RGB-D frame sequences on disk:
//
//   <seq>/frame-000000.color.png   8-bit RGB (gray PNGs are expanded to RGB)
//   <seq>/frame-000000.depth.png   16-bit depth in millimeters; 0 and 65535 = invalid
//   <seq>/frame-000000.pose.txt    4x4 row-major homogeneous matrix
//
// Pose files are camera-to-world or world-to-camera depending on the
// sequence's pose convention; FrameRecord always holds world-to-camera.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "geowarp/frame.hpp"
#include "geowarp/geometry.hpp"
#include "geowarp/imaging.hpp"

namespace geowarp {

enum class PoseConvention { CamToWorld, WorldToCam };

struct FrameRecord {
  ImageBuffer image;
  DepthMap depth;
  Pose pose_gt;  // world-to-camera
  std::size_t frame_id = 0;
  std::string source_path;
};

inline constexpr double kDepthScale = 1000.0;  // raw units per meter
inline constexpr std::uint16_t kDepthInvalidHigh = 65535;

/// Throws ErrorCode::Io (message names the path) on missing or corrupt files
/// and ErrorCode::InvalidPose when the rotation block is not orthonormal
/// within 1e-3.
FrameRecord load_frame(const std::filesystem::path& rgb_path, const std::filesystem::path& depth_path,
                       const std::filesystem::path& pose_path, PoseConvention convention);

/// Inverse of load_frame: intensities are rounded to 8 bits, depth to
/// millimeters (valid depths clamp to [1, 65534] mm).
void save_frame(const FrameRecord& frame, const std::filesystem::path& rgb_path,
                const std::filesystem::path& depth_path, const std::filesystem::path& pose_path,
                PoseConvention convention);

std::filesystem::path frame_path(const std::filesystem::path& dir, std::size_t index, std::string_view kind);

/// Loads frame-000000, frame-000001, ... until the first missing color file.
std::vector<FrameRecord> load_sequence(const std::filesystem::path& dir, PoseConvention convention);

Mat4 read_pose_matrix(const std::filesystem::path& path);
void write_pose_matrix(const std::filesystem::path& path, const Mat4& m);

/// Image bilinear, depth nearest-neighbour, intrinsics rescaled about pixel
/// centers. Throws InvalidInput when asked to upsample.
std::pair<FrameRecord, Intrinsics> resize_frame(const FrameRecord& frame, const Intrinsics& k, int target_width,
                                                int target_height);

/// Invalidates exactly round(remove_fraction * valid_count) valid pixels,
/// chosen by a seeded shuffle.
DepthMap sparsify_depth(const DepthMap& depth, double remove_fraction, std::uint64_t seed);

/// Invalidates depths >= max_depth.
DepthMap range_filter(const DepthMap& depth, double max_depth);

/// Pairs (i, i + stride); depth comes from the earlier frame only.
std::vector<FramePair> pair_frames(const std::vector<FrameRecord>& sequence, std::size_t stride, const Intrinsics& k);

// 8/16-bit PNG access used by the loaders and the CLI.
struct PngImage {
  int width = 0;
  int height = 0;
  int channels = 0;   // 1 or 3
  int bit_depth = 8;  // 8 or 16
  std::vector<std::uint16_t> samples;
};

/// Reads any PNG as 8-bit RGB (expand_to_rgb) or as 16-bit single channel.
PngImage read_png(const std::filesystem::path& path, bool expand_to_rgb);
void write_png(const std::filesystem::path& path, const PngImage& image);

}  // namespace geowarp
