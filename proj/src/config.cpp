#include "geowarp/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <vector>

#include "geowarp/error.hpp"

namespace geowarp {

namespace {

Error bad_value(std::string_view key, std::string_view value) {
  return Error(ErrorCode::InvalidInput, "invalid value '" + std::string(value) + "' for " + std::string(key));
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) throw bad_value(key, value);
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct Field {
  std::string_view key;
  std::function<void(RunConfig&, std::string_view, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename Access>
Field real(std::string_view key, Access access) {
  return {key,
          [access](RunConfig& c, std::string_view k, std::string_view v) { access(c) = parse_number<double>(k, v); },
          [access](const RunConfig& c) { return format_double(access(c)); }};
}

template <typename T, typename Access>
Field integer(std::string_view key, Access access) {
  return {key,
          [access](RunConfig& c, std::string_view k, std::string_view v) { access(c) = parse_number<T>(k, v); },
          [access](const RunConfig& c) { return std::to_string(access(c)); }};
}

template <typename Access>
Field text(std::string_view key, Access access) {
  return {key, [access](RunConfig& c, std::string_view, std::string_view v) { access(c) = std::string(v); },
          [access](const RunConfig& c) { return access(c); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      real("beta", [](auto& c) -> auto& { return c.loss.weights.beta; }),
      real("lambda_d", [](auto& c) -> auto& { return c.loss.weights.lambda_d; }),
      real("lambda_p", [](auto& c) -> auto& { return c.loss.weights.lambda_p; }),
      real("lambda_s", [](auto& c) -> auto& { return c.loss.weights.lambda_s; }),
      real("h", [](auto& c) -> auto& { return c.loss.weights.h; }),
      real("c1", [](auto& c) -> auto& { return c.loss.weights.c1; }),
      real("c2", [](auto& c) -> auto& { return c.loss.weights.c2; }),
      {"photometric_norm",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         if (v == "sum") c.loss.options.norm = PhotometricNorm::Sum;
         else if (v == "mean") c.loss.options.norm = PhotometricNorm::Mean;
         else throw bad_value(k, v);
       },
       [](const RunConfig& c) { return std::string(c.loss.options.norm == PhotometricNorm::Sum ? "sum" : "mean"); }},
      {"channels",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         if (v == "grayscale") c.loss.options.channels = ChannelMode::Grayscale;
         else if (v == "per_channel") c.loss.options.channels = ChannelMode::PerChannel;
         else throw bad_value(k, v);
       },
       [](const RunConfig& c) {
         return std::string(c.loss.options.channels == ChannelMode::Grayscale ? "grayscale" : "per_channel");
       }},
      real("reject_fraction", [](auto& c) -> auto& { return c.loss.options.reject_fraction; }),
      {"mode", [](RunConfig& c, std::string_view, std::string_view v) { c.align.mode = parse_warp_mode(v); },
       [](const RunConfig& c) { return std::string(to_string(c.align.mode)); }},
      integer<int>("max_iterations", [](auto& c) -> auto& { return c.align.max_iterations; }),
      real("initial_step", [](auto& c) -> auto& { return c.align.initial_step; }),
      real("step_shrink", [](auto& c) -> auto& { return c.align.step_shrink; }),
      real("convergence_tol", [](auto& c) -> auto& { return c.align.convergence_tol; }),
      real("function_tol", [](auto& c) -> auto& { return c.align.function_tol; }),
      real("armijo", [](auto& c) -> auto& { return c.align.armijo; }),
      real("min_step", [](auto& c) -> auto& { return c.align.min_step; }),
      real("max_update", [](auto& c) -> auto& { return c.align.max_update; }),
      integer<int>("history", [](auto& c) -> auto& { return c.align.history; }),
      text("sequence", [](auto& c) -> auto& { return c.sequence; }),
      integer<std::size_t>("frame_prev", [](auto& c) -> auto& { return c.frame_prev; }),
      integer<std::size_t>("frame_curr", [](auto& c) -> auto& { return c.frame_curr; }),
      {"pose_convention",
       [](RunConfig& c, std::string_view, std::string_view v) { c.pose_convention = parse_pose_convention(v); },
       [](const RunConfig& c) { return std::string(to_string(c.pose_convention)); }},
      real("sparsity", [](auto& c) -> auto& { return c.sparsity; }),
      real("max_depth", [](auto& c) -> auto& { return c.max_depth; }),
      integer<std::uint64_t>("seed", [](auto& c) -> auto& { return c.seed; }),
      real("perturb_translation", [](auto& c) -> auto& { return c.perturb_translation; }),
      real("perturb_rotation_deg", [](auto& c) -> auto& { return c.perturb_rotation_deg; }),
      text("pred_poses", [](auto& c) -> auto& { return c.pred_poses; }),
      text("gt_poses", [](auto& c) -> auto& { return c.gt_poses; }),
      integer<int>("synth_frames", [](auto& c) -> auto& { return c.synth.frames; }),
      integer<int>("synth_width", [](auto& c) -> auto& { return c.synth.width; }),
      integer<int>("synth_height", [](auto& c) -> auto& { return c.synth.height; }),
      real("synth_focal", [](auto& c) -> auto& { return c.synth.focal; }),
      real("synth_distance", [](auto& c) -> auto& { return c.synth.distance; }),
      real("synth_tilt_deg", [](auto& c) -> auto& { return c.synth.tilt_deg; }),
      real("synth_step", [](auto& c) -> auto& { return c.synth.step; }),
      real("synth_rotation_step", [](auto& c) -> auto& { return c.synth.rotation_step; }),
      text("out", [](auto& c) -> auto& { return c.out; }),
      {"format", [](RunConfig& c, std::string_view, std::string_view v) { c.format = parse_report_format(v); },
       [](const RunConfig& c) { return std::string(to_string(c.format)); }},
  };
  return table;
}

}  // namespace

void RunConfig::validate() const {
  loss.weights.validate();
  align.validate();
  if (!(loss.options.reject_fraction >= 0.0 && loss.options.reject_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidInput, "reject_fraction must lie in [0, 1)");
  }
  if (!(sparsity >= 0.0 && sparsity <= 1.0)) throw Error(ErrorCode::InvalidInput, "sparsity must lie in [0, 1]");
  if (!(max_depth > 0.0)) throw Error(ErrorCode::InvalidInput, "max_depth must be positive");
  if (!(perturb_translation >= 0.0) || !(perturb_rotation_deg >= 0.0)) {
    throw Error(ErrorCode::InvalidInput, "perturbation magnitudes must be non-negative");
  }
  if (synth.frames < 1 || synth.width < 2 || synth.height < 2 || !(synth.focal > 0.0) || !(synth.distance > 0.0) ||
      !(synth.step >= 0.0) || !(synth.rotation_step >= 0.0)) {
    throw Error(ErrorCode::InvalidInput, "invalid synth settings");
  }
}

void apply_setting(RunConfig& config, std::string_view key, std::string_view value) {
  for (const Field& f : fields()) {
    if (f.key == key) {
      f.set(config, key, trim(value));
      return;
    }
  }
  throw Error(ErrorCode::InvalidInput, "unknown config key: " + std::string(key));
}

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config file: " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view body = line;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    body = trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::InvalidInput, path.string() + ":" + std::to_string(number) + ": expected key = value");
    }
    out[std::string(trim(body.substr(0, eq)))] = std::string(trim(body.substr(eq + 1)));
  }
  return out;
}

void load_config_file(RunConfig& config, const std::filesystem::path& path) {
  for (const auto& [k, v] : read_key_values(path)) apply_setting(config, k, v);
}

ConfigEcho echo(const RunConfig& config) {
  ConfigEcho out;
  for (const Field& f : fields()) out.emplace_back(std::string(f.key), f.get(config));
  return out;
}

std::string_view to_string(WarpMode m) { return m == WarpMode::Anchored ? "anchored" : "self_supervised"; }

std::string_view to_string(PoseConvention c) {
  return c == PoseConvention::CamToWorld ? "cam_to_world" : "world_to_cam";
}

WarpMode parse_warp_mode(std::string_view s) {
  if (s == "anchored") return WarpMode::Anchored;
  if (s == "self_supervised") return WarpMode::SelfSupervised;
  throw bad_value("mode", s);
}

PoseConvention parse_pose_convention(std::string_view s) {
  if (s == "cam_to_world") return PoseConvention::CamToWorld;
  if (s == "world_to_cam") return PoseConvention::WorldToCam;
  throw bad_value("pose_convention", s);
}

SequenceInfo read_sequence_info(const std::filesystem::path& dir) {
  const auto kv = read_key_values(dir / "sequence.cfg");
  const auto need = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw Error(ErrorCode::InvalidInput, "sequence.cfg lacks " + key + ": " + dir.string());
    return it->second;
  };
  SequenceInfo info;
  info.intrinsics.fx = parse_number<double>("fx", need("fx"));
  info.intrinsics.fy = parse_number<double>("fy", need("fy"));
  info.intrinsics.cx = parse_number<double>("cx", need("cx"));
  info.intrinsics.cy = parse_number<double>("cy", need("cy"));
  info.intrinsics.width = parse_number<int>("width", need("width"));
  info.intrinsics.height = parse_number<int>("height", need("height"));
  info.pose_convention = parse_pose_convention(need("pose_convention"));
  info.intrinsics.validate();
  return info;
}

void write_sequence_info(const std::filesystem::path& dir, const SequenceInfo& info) {
  const auto path = dir / "sequence.cfg";
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write file: " + path.string());
  const Intrinsics& k = info.intrinsics;
  out << "fx = " << format_double(k.fx) << '\n'
      << "fy = " << format_double(k.fy) << '\n'
      << "cx = " << format_double(k.cx) << '\n'
      << "cy = " << format_double(k.cy) << '\n'
      << "width = " << k.width << '\n'
      << "height = " << k.height << '\n'
      << "pose_convention = " << to_string(info.pose_convention) << '\n';
  if (!out) throw Error(ErrorCode::Io, "failed writing file: " + path.string());
}

}  // namespace geowarp
