#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "geowarp/geometry.hpp"

namespace geowarp {

/// Row-major intensity image with 1 or 3 interleaved channels in [0, 1].
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int width, int height, int channels, double fill = 0.0);
  ImageBuffer(int width, int height, int channels, std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }

  double at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }
  double& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  /// Clamps every sample into [0, 1]; non-finite samples become 0.
  void clamp_unit();

 private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<double> data_;
};

/// Metric depth with a per-pixel validity flag. Invalid pixels carry depth 0.
class DepthMap {
 public:
  DepthMap() = default;
  DepthMap(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return depth_.size(); }

  double depth(int x, int y) const { return depth_[index(x, y)]; }
  bool valid(int x, int y) const { return valid_[index(x, y)] != 0; }
  double depth(std::size_t i) const { return depth_[i]; }
  bool valid(std::size_t i) const { return valid_[i] != 0; }

  /// Stores d and marks the pixel valid iff d is positive and finite.
  void set(int x, int y, double d);
  void set(std::size_t i, double d);
  void invalidate(std::size_t i);

  std::size_t valid_count() const;

 private:
  std::size_t index(int x, int y) const noexcept { return static_cast<std::size_t>(y) * width_ + x; }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> depth_;
  std::vector<std::uint8_t> valid_;
};

class PixelMask {
 public:
  PixelMask() = default;
  PixelMask(int width, int height, bool keep = true);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return keep_.size(); }

  bool keep(int x, int y) const { return keep_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  bool keep(std::size_t i) const { return keep_[i] != 0; }
  void set(int x, int y, bool k) { keep_[static_cast<std::size_t>(y) * width_ + x] = k ? 1 : 0; }
  void set(std::size_t i, bool k) { keep_[i] = k ? 1 : 0; }

  std::size_t count() const;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> keep_;
};

inline constexpr int kMaxChannels = 3;

/// Result of sampling an image at a continuous coordinate. Values and the
/// spatial derivatives (d/du, d/dv) are only meaningful when in_bounds.
struct BilinearSample {
  bool in_bounds = false;
  std::array<double, kMaxChannels> value{};
  std::array<double, kMaxChannels> d_du{};
  std::array<double, kMaxChannels> d_dv{};
};

/// Luminance 0.299 R + 0.587 G + 0.114 B. Throws InvalidInput unless 3 channels.
ImageBuffer to_grayscale(const ImageBuffer& img);

/// Bilinear blend of the 2x2 neighbourhood around u and its analytic
/// derivative. The neighbourhood must lie inside the image: 0 <= u <= w-1 and
/// 0 <= v <= h-1. On the last row/column the cell to the left/top is used so
/// integer coordinates reproduce pixel values exactly. Derivatives on grid
/// lines are one-sided (taken from the cell at floor(u)).
BilinearSample bilinear_sample(const ImageBuffer& img, const Vec2& u);

PixelMask mask_and(const PixelMask& a, const PixelMask& b);

struct SSIMStats {
  double mean_x = 0.0;
  double mean_y = 0.0;
  double var_x = 0.0;
  double var_y = 0.0;
  double cov_xy = 0.0;
  std::size_t count = 0;
};

/// Global first and second moments over the masked pixels of one channel
/// (population convention). Throws DegenerateStatistics with fewer than 2
/// masked pixels, InvalidInput on shape mismatch.
SSIMStats image_stats(const ImageBuffer& a, const ImageBuffer& b, const PixelMask& mask, int channel = 0);

}  // namespace geowarp
