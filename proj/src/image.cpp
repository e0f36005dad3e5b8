#include "svbrdf/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>

#include "svbrdf/common.hpp"
#include "svbrdf/parallel.hpp"

namespace svbrdf {

LinearImage::LinearImage(int w, int h, int c, float fill)
    : width(w), height(h), channels(c),
      data(static_cast<std::size_t>(w) * h * c, fill) {
  SVBRDF_REQUIRE(w > 0 && h > 0 && (c == 1 || c == 3), "invalid image dimensions");
}

void LinearImage::validate() const {
  SVBRDF_REQUIRE(width > 0 && height > 0 && (channels == 1 || channels == 3),
                 "invalid image dimensions");
  SVBRDF_REQUIRE(data.size() == static_cast<std::size_t>(width) * height * channels,
                 "image data length does not match dimensions");
  for (float v : data)
    SVBRDF_REQUIRE(std::isfinite(v) && v >= 0.f, "image contains negative or non-finite values");
}

float srgb_to_linear(float encoded) {
  if (encoded <= 0.04045f) return encoded / 12.92f;
  return std::pow((encoded + 0.055f) / 1.055f, 2.4f);
}

float linear_to_srgb(float linear) {
  if (linear <= 0.0031308f) return linear * 12.92f;
  return 1.055f * std::pow(linear, 1.f / 2.4f) - 0.055f;
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

LinearImage load_image(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  SVBRDF_REQUIRE(fp != nullptr, "cannot open image file: " + path);

  png_byte header[8];
  SVBRDF_REQUIRE(std::fread(header, 1, 8, fp.get()) == 8 && !png_sig_cmp(header, 0, 8),
                 "not a PNG file: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  SVBRDF_REQUIRE(png, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw DataError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("failed to decode PNG: " + path);
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);

  if (bit_depth != 8 && bit_depth != 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError(path + ": unsupported bit depth " + std::to_string(bit_depth) +
                    " (need 8 or 16)");
  }
  if (color_type != PNG_COLOR_TYPE_GRAY && color_type != PNG_COLOR_TYPE_RGB) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError(path + ": unsupported color type (need RGB or grayscale without alpha)");
  }
  if (bit_depth == 16) png_set_swap(png);  // PNG is big-endian on disk
  png_read_update_info(png, info);

  const int channels = (color_type == PNG_COLOR_TYPE_GRAY) ? 1 : 3;
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  std::vector<png_byte> raster(row_bytes * h);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = raster.data() + y * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  LinearImage img(static_cast<int>(w), static_cast<int>(h), channels);
  const std::size_t n = img.data.size();
  if (bit_depth == 8) {
    parallel_for(static_cast<std::int64_t>(n), [&](std::int64_t i) {
      img.data[i] = srgb_to_linear(raster[i] / 255.f);
    });
  } else {
    const auto* px16 = reinterpret_cast<const std::uint16_t*>(raster.data());
    parallel_for(static_cast<std::int64_t>(n), [&](std::int64_t i) {
      img.data[i] = srgb_to_linear(px16[i] / 65535.f);
    });
  }
  return img;
}

void save_image(const LinearImage& img, const std::string& path) {
  img.validate();
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  SVBRDF_REQUIRE(fp != nullptr, "cannot write image file: " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  SVBRDF_REQUIRE(png, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw DataError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("failed to encode PNG: " + path);
  }
  png_init_io(png, fp.get());
  const int color_type = img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  png_set_IHDR(png, info, img.width, img.height, 8, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<png_byte> raster(img.data.size());
  parallel_for(static_cast<std::int64_t>(img.data.size()), [&](std::int64_t i) {
    const float clamped = std::min(1.f, std::max(0.f, img.data[i]));
    const float encoded = linear_to_srgb(clamped);
    raster[i] = static_cast<png_byte>(std::lround(encoded * 255.f));
  });
  const std::size_t row_bytes = static_cast<std::size_t>(img.width) * img.channels;
  for (int y = 0; y < img.height; ++y)
    png_write_row(png, raster.data() + static_cast<std::size_t>(y) * row_bytes);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

LinearImage crop(const LinearImage& img, int x, int y, int size) {
  SVBRDF_REQUIRE(size > 0 && x >= 0 && y >= 0 && x + size <= img.width && y + size <= img.height,
                 "crop rectangle out of bounds");
  LinearImage out(size, size, img.channels);
  parallel_for(size, [&](std::int64_t row) {
    const float* src = &img.data[((static_cast<std::size_t>(y) + row) * img.width + x) * img.channels];
    float* dst = &out.data[static_cast<std::size_t>(row) * size * img.channels];
    std::memcpy(dst, src, static_cast<std::size_t>(size) * img.channels * sizeof(float));
  });
  return out;
}

LinearImage blend(const LinearImage& a, const LinearImage& b, float w) {
  SVBRDF_REQUIRE(a.same_shape(b), "blend: image dimensions differ");
  SVBRDF_REQUIRE(w >= 0.f && w <= 1.f, "blend: weight outside [0,1]");
  LinearImage out(a.width, a.height, a.channels);
  parallel_for(static_cast<std::int64_t>(a.data.size()), [&](std::int64_t i) {
    out.data[i] = w * a.data[i] + (1.f - w) * b.data[i];
  });
  return out;
}

LinearImage to_luminance(const LinearImage& img) {
  if (img.channels == 1) return img;
  LinearImage out(img.width, img.height, 1);
  parallel_for(static_cast<std::int64_t>(img.pixel_count()), [&](std::int64_t i) {
    const float* px = &img.data[static_cast<std::size_t>(i) * 3];
    out.data[i] = 0.2126f * px[0] + 0.7152f * px[1] + 0.0722f * px[2];
  });
  return out;
}

}  // namespace svbrdf
