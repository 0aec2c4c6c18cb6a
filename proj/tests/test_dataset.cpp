#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "geowarp/dataset.hpp"
#include "geowarp/error.hpp"
#include "support.hpp"

using namespace geowarp;
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

void write_depth_png(const fs::path& p, int w, int h, std::vector<std::uint16_t> raw) {
  write_png(p, PngImage{w, h, 1, 16, std::move(raw)});
}

void write_rgb_png(const fs::path& p, int w, int h, std::uint16_t value) {
  write_png(p, PngImage{w, h, 3, 8, std::vector<std::uint16_t>(static_cast<std::size_t>(w) * h * 3, value)});
}

const char* kIdentity = "1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n";

FrameRecord random_frame(std::uint64_t seed, int w, int h) {
  std::mt19937_64 rng(seed);
  FrameRecord f;
  f.image = test::random_image(rng, w, h, 3);
  f.depth = DepthMap(w, h);
  std::uniform_real_distribution<double> d(0.3, 12.0);
  std::bernoulli_distribution hole(0.1);
  for (std::size_t i = 0; i < f.depth.pixel_count(); ++i) {
    if (!hole(rng)) f.depth.set(i, d(rng));
  }
  f.pose_gt = Pose(Vec3(0.1, -0.2, 0.3), quat_exp(Vec3(0.2, -0.1, 0.05)));
  return f;
}

}  // namespace

TEST_CASE("depth decoding and identity pose") {
  test::ScratchDir dir("decode");
  write_rgb_png(dir.path / "c.png", 3, 1, 255);
  write_depth_png(dir.path / "d.png", 3, 1, {1500, 0, 65535});
  write_text(dir.path / "p.txt", kIdentity);
  const FrameRecord f = load_frame(dir.path / "c.png", dir.path / "d.png", dir.path / "p.txt", PoseConvention::CamToWorld);
  CHECK(f.depth.valid(0));
  CHECK(f.depth.depth(0) == 1.5);
  CHECK(!f.depth.valid(1));
  CHECK(!f.depth.valid(2));
  CHECK(f.image.channels() == 3);
  for (double v : f.image.data()) CHECK(v == 1.0);
  CHECK(f.pose_gt.position().norm() == 0.0);
  CHECK(rotation_angle_deg(f.pose_gt.orientation(), Quat::Identity()) < 1e-9);
}

TEST_CASE("pose conventions are inverses of each other") {
  test::ScratchDir dir("convention");
  write_rgb_png(dir.path / "c.png", 2, 2, 10);
  write_depth_png(dir.path / "d.png", 2, 2, {1000, 1000, 1000, 1000});
  write_text(dir.path / "p.txt", "1 0 0 0.5\n0 1 0 0\n0 0 1 0\n0 0 0 1\n");
  const FrameRecord c2w = load_frame(dir.path / "c.png", dir.path / "d.png", dir.path / "p.txt", PoseConvention::CamToWorld);
  const FrameRecord w2c = load_frame(dir.path / "c.png", dir.path / "d.png", dir.path / "p.txt", PoseConvention::WorldToCam);
  CHECK((c2w.pose_gt.position() - Vec3(-0.5, 0, 0)).norm() < 1e-15);
  CHECK((w2c.pose_gt.position() - Vec3(0.5, 0, 0)).norm() < 1e-15);
}

TEST_CASE("save and load round trip") {
  test::ScratchDir dir("roundtrip");
  const FrameRecord f = random_frame(3, 17, 11);
  for (PoseConvention conv : {PoseConvention::CamToWorld, PoseConvention::WorldToCam}) {
    save_frame(f, dir.path / "c.png", dir.path / "d.png", dir.path / "p.txt", conv);
    const FrameRecord g = load_frame(dir.path / "c.png", dir.path / "d.png", dir.path / "p.txt", conv);
    REQUIRE(g.image.width() == 17);
    REQUIRE(g.image.height() == 11);
    for (std::size_t i = 0; i < f.image.data().size(); ++i) {
      CHECK(std::abs(g.image.data()[i] - f.image.data()[i]) <= 0.5 / 255.0 + 1e-12);
    }
    for (std::size_t i = 0; i < f.depth.pixel_count(); ++i) {
      CHECK(g.depth.valid(i) == f.depth.valid(i));
      if (f.depth.valid(i)) CHECK(std::abs(g.depth.depth(i) - f.depth.depth(i)) <= 0.5e-3 + 1e-12);
    }
    CHECK((g.pose_gt.position() - f.pose_gt.position()).norm() < 1e-12);
    CHECK(rotation_angle_deg(g.pose_gt.orientation(), f.pose_gt.orientation()) < 1e-9);

    // a second trip through the quantized values is exact
    save_frame(g, dir.path / "c2.png", dir.path / "d2.png", dir.path / "p2.txt", conv);
    const FrameRecord h = load_frame(dir.path / "c2.png", dir.path / "d2.png", dir.path / "p2.txt", conv);
    CHECK(std::equal(h.image.data().begin(), h.image.data().end(), g.image.data().begin()));
    for (std::size_t i = 0; i < g.depth.pixel_count(); ++i) CHECK(h.depth.depth(i) == g.depth.depth(i));
  }
}

TEST_CASE("pose matrix text round trip is exact") {
  test::ScratchDir dir("posefile");
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  Mat4 m;
  for (int i = 0; i < 16; ++i) m(i / 4, i % 4) = n(rng);
  write_pose_matrix(dir.path / "p.txt", m);
  CHECK(read_pose_matrix(dir.path / "p.txt") == m);
}

TEST_CASE("corrupt and missing inputs") {
  test::ScratchDir dir("errors");
  write_rgb_png(dir.path / "c.png", 2, 2, 10);
  write_depth_png(dir.path / "d.png", 2, 2, {1000, 1000, 1000, 1000});
  write_text(dir.path / "skew.txt", "1 0.1 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n");
  write_text(dir.path / "short.txt", "1 0 0 0\n0 1 0 0\n");
  write_text(dir.path / "ok.txt", kIdentity);

  // returns the error code and checks that the message names the offending file
  const auto code_of = [&](const char* color, const char* depth, const char* pose, const char* culprit) {
    try {
      load_frame(dir.path / color, dir.path / depth, dir.path / pose, PoseConvention::CamToWorld);
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find(culprit) != std::string::npos);
      return e.code();
    }
    FAIL("no error");
    return ErrorCode::InvalidInput;
  };
  CHECK(code_of("c.png", "d.png", "skew.txt", "skew.txt") == ErrorCode::InvalidPose);
  CHECK(code_of("c.png", "d.png", "short.txt", "short.txt") == ErrorCode::Io);
  CHECK(code_of("c.png", "missing.png", "ok.txt", "missing.png") == ErrorCode::Io);
  CHECK(code_of("nothere.png", "d.png", "ok.txt", "nothere.png") == ErrorCode::Io);
  CHECK(code_of("c.png", "d.png", "nopose.txt", "nopose.txt") == ErrorCode::Io);
  write_text(dir.path / "garbage.png", "not a png");
  CHECK(code_of("c.png", "garbage.png", "ok.txt", "garbage.png") == ErrorCode::Io);

  write_depth_png(dir.path / "small.png", 1, 2, {1000, 1000});
  CHECK_THROWS_AS(load_frame(dir.path / "c.png", dir.path / "small.png", dir.path / "ok.txt", PoseConvention::CamToWorld),
                  Error);
}

TEST_CASE("sequence loading stops at the first gap") {
  test::ScratchDir dir("sequence");
  for (std::size_t i : {0, 1, 2, 4}) {
    save_frame(random_frame(i, 6, 5), frame_path(dir.path, i, "color.png"), frame_path(dir.path, i, "depth.png"),
               frame_path(dir.path, i, "pose.txt"), PoseConvention::CamToWorld);
  }
  CHECK(frame_path(dir.path, 12, "depth.png").filename() == "frame-000012.depth.png");
  const auto seq = load_sequence(dir.path, PoseConvention::CamToWorld);
  REQUIRE(seq.size() == 3);
  CHECK(seq[2].frame_id == 2);
  CHECK_THROWS_AS(load_sequence(dir.path / "absent", PoseConvention::CamToWorld), Error);
}

TEST_CASE("resize_frame") {
  const Intrinsics k{500.0, 500.0, 319.5, 239.5, 640, 480};
  FrameRecord f = random_frame(5, 640, 480);
  const auto [half, kh] = resize_frame(f, k, 320, 240);
  CHECK(kh.width == 320);
  CHECK(kh.height == 240);
  CHECK(kh.fx == 250.0);
  CHECK(kh.fy == 250.0);
  CHECK(kh.cx == 159.5);
  CHECK(kh.cy == 119.5);
  CHECK(half.image.width() == 320);
  CHECK(half.depth.valid_count() <= f.depth.valid_count());
  // a 2x box of the source averages four pixels
  CHECK(std::abs(half.image.at(10, 7, 1) - 0.25 * (f.image.at(20, 14, 1) + f.image.at(21, 14, 1) +
                                                    f.image.at(20, 15, 1) + f.image.at(21, 15, 1))) < 1e-12);

  const auto [same, ks] = resize_frame(f, k, 640, 480);
  CHECK(std::equal(same.image.data().begin(), same.image.data().end(), f.image.data().begin()));
  for (std::size_t i = 0; i < f.depth.pixel_count(); ++i) {
    CHECK(same.depth.valid(i) == f.depth.valid(i));
    CHECK(same.depth.depth(i) == f.depth.depth(i));
  }
  CHECK(ks.fx == k.fx);
  CHECK(ks.cx == k.cx);
  CHECK_THROWS_AS(resize_frame(f, k, 1280, 960), Error);
}

TEST_CASE("sparsify_depth removes an exact, seeded subset") {
  const FrameRecord f = random_frame(9, 40, 30);
  const std::size_t valid = f.depth.valid_count();
  for (double frac : {0.0, 0.2, 0.5, 0.8, 1.0}) {
    const DepthMap s = sparsify_depth(f.depth, frac, 77);
    CHECK(s.valid_count() == valid - static_cast<std::size_t>(std::llround(frac * valid)));
    for (std::size_t i = 0; i < s.pixel_count(); ++i) {
      if (s.valid(i)) {
        CHECK(f.depth.valid(i));
        CHECK(s.depth(i) == f.depth.depth(i));
      }
    }
  }
  const DepthMap a = sparsify_depth(f.depth, 0.5, 1);
  const DepthMap b = sparsify_depth(f.depth, 0.5, 1);
  const DepthMap c = sparsify_depth(f.depth, 0.5, 2);
  bool same_ab = true, same_ac = true;
  for (std::size_t i = 0; i < a.pixel_count(); ++i) {
    same_ab = same_ab && a.valid(i) == b.valid(i);
    same_ac = same_ac && a.valid(i) == c.valid(i);
  }
  CHECK(same_ab);
  CHECK(!same_ac);
  CHECK_THROWS_AS(sparsify_depth(f.depth, 1.5, 0), Error);
  CHECK_THROWS_AS(sparsify_depth(f.depth, -0.1, 0), Error);
}

TEST_CASE("range_filter") {
  DepthMap d(5, 1);
  d.set(std::size_t{0}, 1.0);
  d.set(std::size_t{1}, 4.99);
  d.set(std::size_t{2}, 5.0);
  d.set(std::size_t{3}, 30.0);
  const DepthMap wide = range_filter(d, 25.0);
  CHECK(wide.valid_count() == 3);
  CHECK(!wide.valid(3));
  const DepthMap tight = range_filter(d, 5.0);
  CHECK(tight.valid_count() == 2);
  CHECK(!tight.valid(2));
  CHECK(range_filter(d, std::numeric_limits<double>::infinity()).valid_count() == 4);
  const DepthMap twice = range_filter(tight, 5.0);
  for (std::size_t i = 0; i < d.pixel_count(); ++i) CHECK(twice.valid(i) == tight.valid(i));
  CHECK_THROWS_AS(range_filter(d, 0.0), Error);
}

TEST_CASE("pair_frames") {
  std::vector<FrameRecord> seq;
  for (std::size_t i = 0; i < 5; ++i) {
    seq.push_back(random_frame(i, 8, 6));
    seq.back().frame_id = i;
  }
  const Intrinsics k{10.0, 10.0, 3.5, 2.5, 8, 6};
  CHECK(pair_frames(seq, 1, k).size() == 4);
  const auto p2 = pair_frames(seq, 2, k);
  REQUIRE(p2.size() == 3);
  CHECK(p2[1].index_prev == 1);
  CHECK(p2[1].index_curr == 3);
  for (std::size_t i = 0; i < seq[1].depth.pixel_count(); ++i) CHECK(p2[1].depth_prev.valid(i) == seq[1].depth.valid(i));
  CHECK(pair_frames(seq, 5, k).empty());
  CHECK_THROWS_AS(pair_frames(seq, 0, k), Error);
  const Intrinsics wrong{10.0, 10.0, 3.5, 2.5, 9, 6};
  CHECK_THROWS_AS(pair_frames(seq, 1, wrong), Error);
}
