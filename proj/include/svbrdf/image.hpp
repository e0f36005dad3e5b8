#pragma once

#include <string>
#include <vector>

namespace svbrdf {

// H x W x C grid of non-negative linear-radiance floats. Row-major,
// interleaved channels. Treated as immutable once filled; sharing across
// threads is safe.
struct LinearImage {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1 or 3
  std::vector<float> data;

  LinearImage() = default;
  LinearImage(int w, int h, int c, float fill = 0.f);

  float& at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
  float at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  bool same_shape(const LinearImage& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }

  // Throws DataError when the shape/data invariants do not hold.
  void validate() const;
};

// Piecewise sRGB EOTF and its inverse. Exact round trip on all byte values.
float srgb_to_linear(float encoded);
float linear_to_srgb(float linear);

// Reads an 8- or 16-bit PNG, RGB or grayscale, into linear radiance in [0,1].
LinearImage load_image(const std::string& path);

// Clamps to [0,1], encodes linear -> sRGB and writes an 8-bit PNG.
void save_image(const LinearImage& img, const std::string& path);

LinearImage crop(const LinearImage& img, int x, int y, int size);
LinearImage blend(const LinearImage& a, const LinearImage& b, float w);

// Rec.709 luminance (returns a single-channel image; identity for 1-channel input).
LinearImage to_luminance(const LinearImage& img);

}  // namespace svbrdf
