#pragma once

#include "svbrdf/image.hpp"
#include "svbrdf/maps.hpp"

namespace svbrdf {

inline constexpr float kPi = 3.14159265358979323846f;

// Default light power: a white Lambertian facing the camera renders to 1.
inline constexpr float kDefaultIntensity = kPi;

struct MapGradients {
  LinearImage normal;     // 3 channels, projected onto the unit normal's tangent plane
  LinearImage diffuse;    // 3 channels
  LinearImage specular;   // 1 channel
  LinearImage roughness;  // 1 channel
};

// Collocated-flash Cook-Torrance for one pixel. w is the shared view/light
// direction; out receives linear RGB radiance.
void render_pixel(const float normal[3], const float diffuse[3], float specular, float roughness,
                  const float w[3], float intensity, float out[3]);

// Analytic adjoint of render_pixel. upstream is dLoss/dRadiance; the normal
// gradient is returned with respect to the pre-normalization vector, i.e.
// projected tangent to the unit normal.
void render_pixel_backward(const float normal[3], const float diffuse[3], float specular,
                           float roughness, const float w[3], float intensity,
                           const float upstream[3], float g_normal[3], float g_diffuse[3],
                           float* g_specular, float* g_roughness);

// Renders every pixel of maps under field. Pixel-local: rendering a crop with
// the matching cropped field equals cropping the full render.
LinearImage render(const SvbrdfMaps& maps, const DirectionField& field,
                   float intensity = kDefaultIntensity);

// Gradients of sum(upstream * render(maps)) with respect to all four maps.
MapGradients render_gradients(const SvbrdfMaps& maps, const DirectionField& field, float intensity,
                              const LinearImage& upstream);

}  // namespace svbrdf
