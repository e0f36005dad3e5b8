#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "svbrdf/image.hpp"
#include "svbrdf/maps.hpp"
#include "svbrdf/render.hpp"

namespace svbrdf {

// sqrt of the mean squared difference over all pixels and channels.
double rmse(const LinearImage& a, const LinearImage& b);

struct EvalReport {
  std::string method;
  double diffuse = 0.0;
  double specular = 0.0;
  double roughness = 0.0;
  double normal = 0.0;  // computed on the (n+1)/2 encoding
  std::optional<double> guessed_diffuse;

  static const char* csv_header();  // method,diffuse,specular,roughness,normal,guessed_diffuse
  std::string to_csv_row() const;
  std::string to_text() const;  // aligned table with the metric convention spelled out
};

// guessed_diffuse, when given, is scored against gt.diffuse.
EvalReport report(const SvbrdfMaps& estimated, const SvbrdfMaps& gt,
                  const LinearImage* guessed_diffuse = nullptr,
                  const std::string& method = "estimate");

struct SynthParams {
  double camera_height = 1.0;
  float intensity = kDefaultIntensity;
  float noise_sigma = 0.0f;  // Gaussian sensor noise in linear radiance
  std::uint64_t seed = 0;
  bool distant = false;
};

// One render per lateral camera offset; views are co-registered by
// construction and clamped to [0,1].
std::vector<LinearImage> synth_views(const SvbrdfMaps& gt,
                                     const std::vector<std::array<double, 2>>& lateral_offsets,
                                     const SynthParams& params);

// k x k offset grid spanning [-spread, spread] per axis (row-major order).
std::vector<std::array<double, 2>> offset_grid(int k, double spread);

struct FitParams {
  int iters = 2000;
  float lr = 0.02f;
  float smoothness_weight = 0.01f;  // total variation on the decoded maps
  float intensity = kDefaultIntensity;
};

struct FitResult {
  SvbrdfMaps maps;
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

// Per-pixel inverse rendering: Adam on unconstrained parameters squashed
// through the map decoding, minimizing mean squared render error over all
// views plus the smoothness term. Deterministic.
FitResult direct_fit(const std::vector<LinearImage>& photos,
                     const std::vector<DirectionField>& fields, const FitParams& params);

// Closed-form test materials: "constant", "glossy", "matte", "bumpy".
SvbrdfMaps make_synthetic_maps(const std::string& preset, int size);

}  // namespace svbrdf
