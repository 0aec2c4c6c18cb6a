#include "geowarp/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "geowarp/align.hpp"
#include "geowarp/dataset.hpp"
#include "geowarp/error.hpp"
#include "geowarp/loss.hpp"
#include "geowarp/report.hpp"
#include "geowarp/synth.hpp"
#include "geowarp/warp.hpp"

namespace geowarp {

namespace {

namespace fs = std::filesystem;

struct Seeds {
  std::uint64_t sparsify;
  std::uint64_t perturb_prev;
  std::uint64_t perturb_curr;
};

Seeds derive_seeds(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Seeds s{};
  s.sparsify = rng();
  s.perturb_prev = rng();
  s.perturb_curr = rng();
  return s;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::Io, "cannot create directory: " + dir.string());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot write file: " + path.string());
  f << text;
  if (!f) throw Error(ErrorCode::Io, "failed writing file: " + path.string());
}

void emit(const RunConfig& config, const std::string& text, std::ostream& out) {
  if (config.out.empty()) {
    out << text;
  } else {
    write_text(config.out, text);
  }
}

FramePair load_pair(const RunConfig& config) {
  if (config.sequence.empty()) throw Error(ErrorCode::InvalidInput, "no sequence directory given (--sequence)");
  const fs::path dir = config.sequence;
  const SequenceInfo info = read_sequence_info(dir);
  const auto load = [&](std::size_t i) {
    FrameRecord f = load_frame(frame_path(dir, i, "color.png"), frame_path(dir, i, "depth.png"),
                               frame_path(dir, i, "pose.txt"), info.pose_convention);
    f.frame_id = i;
    return f;
  };
  std::vector<FrameRecord> frames;
  frames.push_back(load(config.frame_prev));
  frames.push_back(load(config.frame_curr));
  std::vector<FramePair> pairs = pair_frames(frames, 1, info.intrinsics);
  FramePair pair = std::move(pairs.front());
  if (std::isfinite(config.max_depth)) pair.depth_prev = range_filter(pair.depth_prev, config.max_depth);
  if (config.sparsity > 0.0) {
    pair.depth_prev = sparsify_depth(pair.depth_prev, config.sparsity, derive_seeds(config.seed).sparsify);
  }
  return pair;
}

PngImage to_png8(const ImageBuffer& img) {
  PngImage png{img.width(), img.height(), img.channels(), 8, {}};
  for (double v : img.data()) png.samples.push_back(static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
  return png;
}

std::string format_pose_line(const Pose& p) {
  const Vec3& t = p.position();
  const Quat& q = p.orientation();
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g %.17g %.17g %.17g\n", t.x(), t.y(), t.z(), q.w(), q.x(),
                q.y(), q.z());
  return buf;
}

}  // namespace

std::vector<Pose> read_pose_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open pose list: " + path);
  std::vector<Pose> poses;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[line.find_first_not_of(" \t\r")] == '#') {
      continue;
    }
    std::istringstream ls(line);
    double v[7];
    for (double& x : v) {
      if (!(ls >> x)) {
        throw Error(ErrorCode::InvalidInput, path + ":" + std::to_string(number) + ": expected tx ty tz qw qx qy qz");
      }
    }
    poses.emplace_back(Vec3(v[0], v[1], v[2]), Quat(v[3], v[4], v[5], v[6]));
  }
  return poses;
}

void write_pose_list(const std::string& path, const std::vector<Pose>& poses) {
  std::string text;
  for (const Pose& p : poses) text += format_pose_line(p);
  write_text(path, text);
}

int cmd_synth(const RunConfig& config, std::ostream& out) {
  if (config.out.empty()) throw Error(ErrorCode::InvalidInput, "synth needs an output directory (--out)");
  const fs::path dir = config.out;
  ensure_directory(dir);

  const SynthSettings& s = config.synth;
  SceneOptions options;
  options.intrinsics = {s.focal, s.focal, (s.width - 1) / 2.0, (s.height - 1) / 2.0, s.width, s.height};
  options.distance = s.distance;
  options.tilt_deg = s.tilt_deg;
  options.seed = config.seed;
  const SyntheticScene scene = make_plane_scene(options);

  std::mt19937_64 rng(config.seed ^ 0x5eedULL);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Vec3 center = Vec3::Zero();
  Quat cam_to_world = Quat::Identity();
  for (int i = 0; i < s.frames; ++i) {
    if (i > 0) {
      Vec3 dir(unit(rng), unit(rng), unit(rng));
      if (dir.norm() < 1e-9) dir = Vec3::UnitX();
      center += dir.normalized() * s.step;
      const Vec3 omega(unit(rng), unit(rng), unit(rng));
      cam_to_world = quat_normalize(quat_exp(omega * s.rotation_step) * cam_to_world);
    }
    const Pose pose = pose_from_camera_center(center, cam_to_world);
    RenderedView view = render_view(scene, pose, 3);
    FrameRecord frame{std::move(view.image), std::move(view.depth), pose, static_cast<std::size_t>(i), {}};
    save_frame(frame, frame_path(dir, i, "color.png"), frame_path(dir, i, "depth.png"), frame_path(dir, i, "pose.txt"),
               PoseConvention::CamToWorld);
  }
  write_sequence_info(dir, {options.intrinsics, PoseConvention::CamToWorld});
  out << "wrote " << s.frames << " frames to " << dir.string() << '\n';
  return kExitOk;
}

int cmd_warp(const RunConfig& config, std::ostream& out) {
  const FramePair pair = load_pair(config);
  const RigidTransform rel = relative_transform(pose_to_transform(pair.gt_prev), pose_to_transform(pair.gt_curr));
  const WarpResult w = warp_image(pair.image_curr, pair.depth_prev, rel, pair.intrinsics, pair.mask);

  std::size_t valid = 0;
  std::size_t gated = 0;
  double flow_sum = 0.0;
  double flow_max = 0.0;
  for (std::size_t i = 0; i < w.flow_l1.size(); ++i) {
    if (!w.validity.keep(i)) continue;
    ++valid;
    flow_sum += w.flow_l1[i];
    flow_max = std::max(flow_max, w.flow_l1[i]);
    if (w.flow_l1[i] > config.loss.weights.h) ++gated;
  }

  ReportDocument doc;
  doc.kind = "warp";
  doc.config = echo(config);
  doc.scalars = {{"valid_pixel_count", static_cast<double>(valid)},
                 {"gated_pixel_count", static_cast<double>(gated)},
                 {"mean_flow_l1", valid ? flow_sum / static_cast<double>(valid) : 0.0},
                 {"max_flow_l1", flow_max}};
  const std::string text = serialize(doc, config.format);

  if (config.out.empty()) {
    out << text;
    return kExitOk;
  }
  const fs::path dir = config.out;
  ensure_directory(dir);
  write_png(dir / "warped.png", to_png8(w.warped));
  PngImage mask{w.validity.width(), w.validity.height(), 1, 8, {}};
  for (std::size_t i = 0; i < w.validity.pixel_count(); ++i) mask.samples.push_back(w.validity.keep(i) ? 255 : 0);
  write_png(dir / "validity.png", mask);
  write_text(dir / (std::string("flow.") + std::string(to_string(config.format))), text);
  out << text;
  return kExitOk;
}

int cmd_loss(const RunConfig& config, std::ostream& out) {
  const FramePair pair = load_pair(config);
  Pose prev = pair.gt_prev;
  Pose curr = pair.gt_curr;
  if (!config.pred_poses.empty()) {
    const std::vector<Pose> pred = read_pose_list(config.pred_poses);
    if (pred.size() != 2) throw Error(ErrorCode::InvalidInput, "loss expects exactly two predicted poses");
    prev = pred[0];
    curr = pred[1];
  }
  const LossBreakdown loss = total_loss(pair, prev, curr, config.loss, config.align.mode);
  emit(config, emit_report(loss, config.format, echo(config)), out);
  return kExitOk;
}

int cmd_align(const RunConfig& config, std::ostream& out) {
  const FramePair pair = load_pair(config);
  const Seeds seeds = derive_seeds(config.seed);
  const double rot = config.perturb_rotation_deg * std::numbers::pi / 180.0;
  const Pose init_prev =
      perturb_pose(pair.gt_prev, random_perturbation(seeds.perturb_prev, config.perturb_translation, rot));
  // The anchored arm never moves the current pose, so it starts at ground truth.
  const Pose init_curr = config.align.mode == WarpMode::Anchored
                             ? pair.gt_curr
                             : perturb_pose(pair.gt_curr, random_perturbation(seeds.perturb_curr,
                                                                              config.perturb_translation, rot));

  const AlignReport report = refine_poses(pair, config.loss, config.align, init_prev, init_curr);
  ReportDocument doc = to_document(report, echo(config));
  const ErrorTable init = pose_errors({init_prev, init_curr}, {pair.gt_prev, pair.gt_curr});
  const ErrorTable final = pose_errors({report.pose_prev, report.pose_curr}, {pair.gt_prev, pair.gt_curr});
  doc.scalars.emplace_back("initial_error_t_prev", init.translation_errors[0]);
  doc.scalars.emplace_back("initial_error_r_prev", init.rotation_errors[0]);
  doc.scalars.emplace_back("initial_error_t_curr", init.translation_errors[1]);
  doc.scalars.emplace_back("initial_error_r_curr", init.rotation_errors[1]);
  doc.scalars.emplace_back("error_t_prev", final.translation_errors[0]);
  doc.scalars.emplace_back("error_r_prev", final.rotation_errors[0]);
  doc.scalars.emplace_back("error_t_curr", final.translation_errors[1]);
  doc.scalars.emplace_back("error_r_curr", final.rotation_errors[1]);
  emit(config, serialize(doc, config.format), out);
  return kExitOk;
}

int cmd_eval(const RunConfig& config, std::ostream& out) {
  if (config.pred_poses.empty() || config.gt_poses.empty()) {
    throw Error(ErrorCode::InvalidInput, "eval needs --pred and --gt pose lists");
  }
  const ErrorTable table = pose_errors(read_pose_list(config.pred_poses), read_pose_list(config.gt_poses));
  emit(config, emit_report(table, config.format, echo(config)), out);
  return kExitOk;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Geometric image warping, composite loss evaluation and two-frame pose refinement", "geowarp"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::vector<std::string> sets;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat key = value config file");
    const auto bind = [&](const std::string& flag, const std::string& key, const std::string& help) {
      sub->add_option_function<std::string>(
          flag, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); }, help);
    };
    bind("--seed", "seed", "random seed");
    bind("--mode", "mode", "anchored | self_supervised");
    bind("--sparsity", "sparsity", "fraction of valid depth removed");
    bind("--max-depth", "max_depth", "depth cutoff in meters");
    bind("--out", "out", "output file (directory for synth and warp)");
    bind("--format", "format", "csv | json");
    bind("--sequence", "sequence", "dataset directory");
    bind("--prev", "frame_prev", "index of the earlier frame");
    bind("--curr", "frame_curr", "index of the later frame");
    bind("--pred", "pred_poses", "predicted pose list");
    bind("--gt", "gt_poses", "ground-truth pose list");
    bind("--frames", "synth_frames", "number of frames to synthesize");
    sub->add_option("--set", sets, "override any config key: key=value");
  };

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const RunConfig&, std::ostream&);
  };
  const Command commands[] = {
      {"synth", "render a seeded synthetic sequence", cmd_synth},
      {"warp", "warp the later frame onto the earlier frame's grid", cmd_warp},
      {"loss", "evaluate the composite loss for a frame pair", cmd_loss},
      {"align", "refine perturbed poses of a frame pair", cmd_align},
      {"eval", "median pose errors of two pose lists", cmd_eval},
  };
  std::vector<CLI::App*> subs;
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common(sub);
    subs.push_back(sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    RunConfig config;
    if (!config_path.empty()) load_config_file(config, config_path);
    for (const auto& [k, v] : overrides) apply_setting(config, k, v);
    for (const std::string& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::InvalidInput, "--set expects key=value, got " + s);
      apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
    }
    config.validate();
    configure_threads();
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (subs[i]->parsed()) return commands[i].run(config, out);
    }
    return kExitInvalid;
  } catch (const Error& e) {
    err << "geowarp: " << e.what() << '\n';
    return e.code() == ErrorCode::Io ? kExitIo : kExitInvalid;
  } catch (const std::exception& e) {
    err << "geowarp: " << e.what() << '\n';
    return kExitInvalid;
  }
}

}  // namespace geowarp
