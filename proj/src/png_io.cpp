#include <png.h>

#include <bit>
#include <csetjmp>
#include <cstdio>
#include <memory>

#include "geowarp/dataset.hpp"
#include "geowarp/error.hpp"

namespace geowarp {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

Error io_error(const std::string& what, const std::filesystem::path& path) {
  return Error(ErrorCode::Io, what + ": " + path.string());
}

// libpng reports through callbacks; keep its message for the exception
// instead of letting it print to stderr.
struct PngMessage {
  char text[160] = "unknown error";
};

void on_png_error(png_structp png, png_const_charp msg) {
  if (auto* m = static_cast<PngMessage*>(png_get_error_ptr(png))) std::snprintf(m->text, sizeof m->text, "%s", msg);
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

}  // namespace

PngImage read_png(const std::filesystem::path& path, bool expand_to_rgb) {
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "rb"));
  if (!file) throw io_error("cannot open file", path);

  PngMessage message;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, on_png_error, on_png_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw io_error("cannot initialise PNG reader", path);
  }

  PngImage out;
  std::vector<png_byte> buffer;
  std::vector<png_bytep> rows;
  volatile bool wrong_format = false;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw io_error(std::string("corrupt or unreadable PNG (") + message.text + ")", path);
  }
  png_init_io(png, file.get());
  png_read_info(png, info);

  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (expand_to_rgb) {
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    out.channels = 3;
    out.bit_depth = 8;
  } else {
    wrong_format = color != PNG_COLOR_TYPE_GRAY || (depth != 16 && depth != 8);
    if (depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
    out.channels = 1;
    out.bit_depth = depth;
  }
  png_read_update_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  buffer.resize(row_bytes * out.height);
  rows.resize(out.height);
  for (int y = 0; y < out.height; ++y) rows[y] = buffer.data() + row_bytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (wrong_format) throw io_error("expected a single-channel 8/16-bit depth PNG", path);

  const std::size_t n = static_cast<std::size_t>(out.width) * out.height * out.channels;
  out.samples.resize(n);
  if (out.bit_depth == 16) {
    for (int y = 0; y < out.height; ++y) {
      const auto* src = reinterpret_cast<const std::uint16_t*>(rows[y]);
      for (int x = 0; x < out.width; ++x) out.samples[static_cast<std::size_t>(y) * out.width + x] = src[x];
    }
  } else {
    const std::size_t per_row = static_cast<std::size_t>(out.width) * out.channels;
    for (int y = 0; y < out.height; ++y) {
      for (std::size_t j = 0; j < per_row; ++j) out.samples[y * per_row + j] = rows[y][j];
    }
  }
  return out;
}

void write_png(const std::filesystem::path& path, const PngImage& image) {
  if ((image.channels != 1 && image.channels != 3) || (image.bit_depth != 8 && image.bit_depth != 16) ||
      image.samples.size() != static_cast<std::size_t>(image.width) * image.height * image.channels) {
    throw Error(ErrorCode::InvalidInput, "write_png: inconsistent image description");
  }
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "wb"));
  if (!file) throw io_error("cannot write file", path);

  PngMessage message;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, on_png_error, on_png_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw io_error("cannot initialise PNG writer", path);
  }

  const int bytes_per_sample = image.bit_depth / 8;
  const std::size_t row_bytes = static_cast<std::size_t>(image.width) * image.channels * bytes_per_sample;
  std::vector<png_byte> buffer(row_bytes * image.height);
  std::vector<png_bytep> rows(image.height);
  for (int y = 0; y < image.height; ++y) {
    png_bytep row = buffer.data() + row_bytes * y;
    rows[y] = row;
    for (std::size_t j = 0; j < static_cast<std::size_t>(image.width) * image.channels; ++j) {
      const std::uint16_t v = image.samples[y * static_cast<std::size_t>(image.width) * image.channels + j];
      if (bytes_per_sample == 2) {
        row[2 * j] = static_cast<png_byte>(v >> 8);  // PNG stores big-endian
        row[2 * j + 1] = static_cast<png_byte>(v & 0xff);
      } else {
        row[j] = static_cast<png_byte>(v);
      }
    }
  }

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw io_error(std::string("failed writing PNG (") + message.text + ")", path);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, image.width, image.height, image.bit_depth,
               image.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace geowarp
