#pragma once

// Run configuration for the command-line tools: a flat "key = value" text
// file, overridable per key, echoed verbatim into every report.

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <string>
#include <string_view>

#include "geowarp/align.hpp"
#include "geowarp/dataset.hpp"
#include "geowarp/geometry.hpp"
#include "geowarp/loss.hpp"
#include "geowarp/report.hpp"

namespace geowarp {

struct SynthSettings {
  int frames = 3;
  int width = 160;
  int height = 120;
  double focal = 80.0;        // pixels
  double distance = 4.0;      // meters to the plane
  double tilt_deg = 20.0;
  double step = 0.03;         // camera travel between frames, meters
  double rotation_step = 0.005;  // rad, per-axis scale of the inter-frame rotation
};

struct RunConfig {
  LossConfig loss;
  AlignConfig align;

  std::string sequence;          // dataset directory
  std::size_t frame_prev = 0;
  std::size_t frame_curr = 1;
  PoseConvention pose_convention = PoseConvention::CamToWorld;
  double sparsity = 0.0;         // fraction of valid depth removed
  double max_depth = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
  double perturb_translation = 0.02;  // meters
  double perturb_rotation_deg = 1.0;

  std::string pred_poses;
  std::string gt_poses;

  SynthSettings synth;

  std::string out;  // empty: stdout
  ReportFormat format = ReportFormat::Json;

  /// Throws InvalidInput on range violations in any section.
  void validate() const;
};

/// Sets one field by key. Throws InvalidInput on an unknown key or a value
/// that does not parse.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Parses "key = value" lines ('#' starts a comment) into a map, keeping the
/// last occurrence. Throws Io when the file cannot be read.
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);

/// Applies every entry of a config file in file order.
void load_config_file(RunConfig& config, const std::filesystem::path& path);

/// Every key with its effective value, in a fixed order.
ConfigEcho echo(const RunConfig& config);

std::string_view to_string(WarpMode m);
std::string_view to_string(PoseConvention c);
WarpMode parse_warp_mode(std::string_view s);
PoseConvention parse_pose_convention(std::string_view s);

/// Per-sequence metadata stored next to the frames as sequence.cfg.
struct SequenceInfo {
  Intrinsics intrinsics;
  PoseConvention pose_convention = PoseConvention::CamToWorld;
};

SequenceInfo read_sequence_info(const std::filesystem::path& dir);
void write_sequence_info(const std::filesystem::path& dir, const SequenceInfo& info);

}  // namespace geowarp
