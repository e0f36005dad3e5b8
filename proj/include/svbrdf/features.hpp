#pragma once

#include <array>
#include <utility>
#include <vector>

#include "svbrdf/image.hpp"

namespace svbrdf {

inline constexpr int kDescriptorSize = 64;  // 8x8 normalized intensity patch

// Corner keypoint with sub-pixel position and an L2-normalized descriptor.
struct Feature {
  float x = 0.f;
  float y = 0.f;
  std::array<float, kDescriptorSize> descriptor{};
};

struct FeatureParams {
  float harris_k = 0.04f;
  float rel_threshold = 0.01f;   // fraction of the max corner response
  int nms_radius = 3;
  int max_features = 1500;
  int descriptor_step = 2;       // sample spacing of the 8x8 grid, in pixels
};

// Harris-style corner detector. Flat images yield an empty list.
std::vector<Feature> detect_features(const LinearImage& img, const FeatureParams& params = {});

// Brute-force nearest neighbor with Lowe's ratio test; pairs are unique in
// the first index.
std::vector<std::pair<int, int>> match_features(const std::vector<Feature>& a,
                                                const std::vector<Feature>& b,
                                                float ratio = 0.7f);

}  // namespace svbrdf
