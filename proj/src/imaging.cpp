#include "geowarp/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "geowarp/error.hpp"

namespace geowarp {

namespace {

void require_dims(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::InvalidInput, "image dimensions must be positive");
  }
}

}  // namespace

ImageBuffer::ImageBuffer(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
  require_dims(width, height);
  if (channels != 1 && channels != 3) {
    throw Error(ErrorCode::InvalidInput, "images have 1 or 3 channels");
  }
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

ImageBuffer::ImageBuffer(int width, int height, int channels, std::vector<double> data)
    : ImageBuffer(width, height, channels) {
  if (data.size() != data_.size()) {
    throw Error(ErrorCode::InvalidInput, "image data length does not match width*height*channels");
  }
  data_ = std::move(data);
}

void ImageBuffer::clamp_unit() {
  for (double& v : data_) {
    v = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
  }
}

DepthMap::DepthMap(int width, int height) : width_(width), height_(height) {
  require_dims(width, height);
  depth_.assign(static_cast<std::size_t>(width) * height, 0.0);
  valid_.assign(depth_.size(), 0);
}

void DepthMap::set(int x, int y, double d) { set(index(x, y), d); }

void DepthMap::set(std::size_t i, double d) {
  const bool ok = d > 0.0 && std::isfinite(d);
  depth_[i] = ok ? d : 0.0;
  valid_[i] = ok ? 1 : 0;
}

void DepthMap::invalidate(std::size_t i) {
  depth_[i] = 0.0;
  valid_[i] = 0;
}

std::size_t DepthMap::valid_count() const {
  return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), std::uint8_t{1}));
}

PixelMask::PixelMask(int width, int height, bool keep) : width_(width), height_(height) {
  require_dims(width, height);
  keep_.assign(static_cast<std::size_t>(width) * height, keep ? 1 : 0);
}

std::size_t PixelMask::count() const {
  return static_cast<std::size_t>(std::count(keep_.begin(), keep_.end(), std::uint8_t{1}));
}

ImageBuffer to_grayscale(const ImageBuffer& img) {
  if (img.channels() != 3) {
    throw Error(ErrorCode::InvalidInput, "to_grayscale expects a 3-channel image");
  }
  ImageBuffer out(img.width(), img.height(), 1);
  const auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = 0.299 * src[3 * i] + 0.587 * src[3 * i + 1] + 0.114 * src[3 * i + 2];
  }
  return out;
}

BilinearSample bilinear_sample(const ImageBuffer& img, const Vec2& u) {
  BilinearSample s;
  const int w = img.width();
  const int h = img.height();
  if (w < 2 || h < 2) return s;
  if (!(u.x() >= 0.0 && u.x() <= w - 1 && u.y() >= 0.0 && u.y() <= h - 1)) return s;

  const int x0 = std::min(static_cast<int>(std::floor(u.x())), w - 2);
  const int y0 = std::min(static_cast<int>(std::floor(u.y())), h - 2);
  const double ax = u.x() - x0;
  const double ay = u.y() - y0;

  s.in_bounds = true;
  for (int c = 0; c < img.channels(); ++c) {
    const double i00 = img.at(x0, y0, c);
    const double i10 = img.at(x0 + 1, y0, c);
    const double i01 = img.at(x0, y0 + 1, c);
    const double i11 = img.at(x0 + 1, y0 + 1, c);
    const double top = i00 + ax * (i10 - i00);
    const double bottom = i01 + ax * (i11 - i01);
    s.value[c] = top + ay * (bottom - top);
    s.d_du[c] = (1.0 - ay) * (i10 - i00) + ay * (i11 - i01);
    s.d_dv[c] = bottom - top;
  }
  return s;
}

PixelMask mask_and(const PixelMask& a, const PixelMask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorCode::InvalidInput, "mask dimensions differ");
  }
  PixelMask out(a.width(), a.height(), false);
  for (std::size_t i = 0; i < a.pixel_count(); ++i) out.set(i, a.keep(i) && b.keep(i));
  return out;
}

SSIMStats image_stats(const ImageBuffer& a, const ImageBuffer& b, const PixelMask& mask, int channel) {
  if (a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels() ||
      mask.width() != a.width() || mask.height() != a.height()) {
    throw Error(ErrorCode::InvalidInput, "image_stats: dimension mismatch");
  }
  if (channel < 0 || channel >= a.channels()) {
    throw Error(ErrorCode::InvalidInput, "image_stats: channel out of range");
  }
  const int nc = a.channels();
  const auto da = a.data();
  const auto db = b.data();

  SSIMStats s;
  double sum_x = 0.0;
  double sum_y = 0.0;
  for (std::size_t i = 0; i < mask.pixel_count(); ++i) {
    if (!mask.keep(i)) continue;
    sum_x += da[i * nc + channel];
    sum_y += db[i * nc + channel];
    ++s.count;
  }
  if (s.count < 2) {
    throw Error(ErrorCode::DegenerateStatistics,
                "image statistics need at least 2 masked pixels, got " + std::to_string(s.count));
  }
  const double n = static_cast<double>(s.count);
  s.mean_x = sum_x / n;
  s.mean_y = sum_y / n;

  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < mask.pixel_count(); ++i) {
    if (!mask.keep(i)) continue;
    const double dx = da[i * nc + channel] - s.mean_x;
    const double dy = db[i * nc + channel] - s.mean_y;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  s.var_x = sxx / n;
  s.var_y = syy / n;
  s.cov_xy = sxy / n;
  return s;
}

}  // namespace geowarp
