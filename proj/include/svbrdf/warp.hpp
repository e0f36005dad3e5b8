#pragma once

#include <cstdint>
#include <vector>

#include "svbrdf/homography.hpp"
#include "svbrdf/image.hpp"

namespace svbrdf {

// Image plus a per-pixel validity mask; invalid pixels are excluded from all
// reductions (warping creates out-of-frame pixels).
struct MaskedImage {
  LinearImage image;
  std::vector<std::uint8_t> valid;  // H*W, 1 = valid

  static MaskedImage fully_valid(LinearImage img);
  bool is_valid(int x, int y) const { return valid[static_cast<std::size_t>(y) * image.width + x] != 0; }
};

// Inverse-mapped bilinear resampling of img into a (out_width x out_height)
// reference frame through h (which maps img coordinates into the frame).
MaskedImage warp_to_reference(const LinearImage& img, const Homography& h, int out_width,
                              int out_height);

// Per-pixel, per-channel minimum over all images whose mask is valid there.
// With exposure_normalize each image is first scaled so its valid-region
// median luminance matches the reference's (index 0).
LinearImage min_composite(const std::vector<MaskedImage>& images, bool exposure_normalize);

struct ExtractParams {
  bool prealigned = false;
  bool exposure_normalize = true;
  double ransac_px = 2.0;
  int ransac_iters = 2000;
  float match_ratio = 0.7f;
  int min_inliers = 10;  // below this a photo is excluded from the composite
  std::uint64_t seed = 0;
};

struct ExtractResult {
  LinearImage guessed_diffuse;
  std::vector<Homography> homographies;  // one per input photo (identity for the reference)
  std::vector<int> excluded;             // indices of photos dropped for failed alignment
};

// Detect, match, RANSAC and warp every non-reference photo into the frame of
// photos[0], then min-composite. Photos that cannot be aligned are excluded
// with a warning, never silently kept.
ExtractResult extract_guessed_diffuse(const std::vector<LinearImage>& photos,
                                      const ExtractParams& params);

}  // namespace svbrdf
