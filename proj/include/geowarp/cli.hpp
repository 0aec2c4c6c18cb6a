#pragma once

// Command implementations behind the `geowarp` executable. Exposed as a
// library so tests can drive them without spawning processes.
//
// Exit codes: 0 success (including non-converged alignment), 1 invalid
// input or usage, 2 file-system / decoding failure.

#include <iosfwd>
#include <string>
#include <vector>

#include "geowarp/config.hpp"

namespace geowarp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitIo = 2;

/// Full argument vector without the program name, e.g. {"align", "--seed", "7"}.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cmd_synth(const RunConfig& config, std::ostream& out);
int cmd_warp(const RunConfig& config, std::ostream& out);
int cmd_loss(const RunConfig& config, std::ostream& out);
int cmd_align(const RunConfig& config, std::ostream& out);
int cmd_eval(const RunConfig& config, std::ostream& out);

/// One pose per non-empty line: "tx ty tz qw qx qy qz" (world-to-camera);
/// lines starting with '#' are skipped.
std::vector<Pose> read_pose_list(const std::string& path);
void write_pose_list(const std::string& path, const std::vector<Pose>& poses);

}  // namespace geowarp
