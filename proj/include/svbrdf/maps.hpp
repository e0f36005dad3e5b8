#pragma once

#include <string>
#include <vector>

#include "svbrdf/image.hpp"

namespace svbrdf {

// The four co-registered material maps. Normals are unit length with
// positive z; roughness lives in [0.01, 1] so the microfacet lobe never
// degenerates.
struct SvbrdfMaps {
  LinearImage normal;     // 3 channels, unit vectors
  LinearImage diffuse;    // 3 channels in [0,1]
  LinearImage specular;   // 1 channel in [0,1] (Fresnel reflectance at normal incidence)
  LinearImage roughness;  // 1 channel in [0.01, 1]

  int width() const { return normal.width; }
  int height() const { return normal.height; }

  // Throws DataError when shapes disagree or any per-pixel invariant fails.
  void validate() const;

  SvbrdfMaps crop(int x, int y, int size) const;

  static SvbrdfMaps constant(int width, int height, const float normal3[3], const float diffuse3[3],
                             float specular, float roughness);
};

// <stem>_normal.png (stored as (n+1)/2), <stem>_diffuse.png, <stem>_roughness.png,
// <stem>_specular.png. All four go through the usual sRGB encode.
void save_maps(const SvbrdfMaps& maps, const std::string& stem);

// Inverse of save_maps. Quantization is repaired on load: normals are
// renormalized with z clamped >= 0.01 and roughness is clamped to [0.01, 1],
// so the result always validates. Gray maps saved as RGB are averaged down.
SvbrdfMaps load_maps(const std::string& stem);

// Per-pixel collocated view/light directions over the unit plane.
struct DirectionField {
  int width = 0;
  int height = 0;
  std::vector<float> dirs;  // W*H*3, unit vectors

  const float* at(int x, int y) const {
    return &dirs[(static_cast<std::size_t>(y) * width + x) * 3];
  }
};

struct FieldParams {
  double camera_height = 1.0;  // plane units above the full-image center
  double camera_x = 0.0;       // lateral camera offset, plane units
  double camera_y = 0.0;
  int crop_x = 0;              // origin of this field within the full frame
  int crop_y = 0;
  int full_width = 0;          // 0 = the field itself is the full frame
  int full_height = 0;
  bool distant = false;        // constant (0,0,1) instead of point collocation
};

// The full frame spans [-0.5, 0.5] along its longer side (endpoint pixel
// convention), and every direction points from the pixel's plane position
// toward the camera.
DirectionField direction_field(int width, int height, const FieldParams& params = {});

// Tanh-range raw channels -> valid maps. Channel layout:
// [normal xyz, roughness, diffuse rgb, specular].
void decode_pixel(const float raw[8], float normal[3], float diffuse[3], float* specular,
                  float* roughness);

// Chain rule through decode_pixel: map-space gradients -> raw-space gradients.
void decode_pixel_backward(const float raw[8], const float g_normal[3], const float g_diffuse[3],
                           float g_specular, float g_roughness, float g_raw[8]);

// raw is H*W*8 interleaved; every output satisfies the SvbrdfMaps invariants
// for any input in [-1, 1].
SvbrdfMaps decode_maps(const std::vector<float>& raw, int width, int height);

}  // namespace svbrdf
