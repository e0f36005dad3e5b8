#pragma once

#include <vector>

#include "svbrdf/image.hpp"
#include "svbrdf/rng.hpp"

namespace svbrdf {

// One training input with its aligned diffuse prior. Both patches share the
// same origin in the reference frame.
struct PatchSample {
  LinearImage photo_patch;
  LinearImage diffuse_patch;
  int origin_x = 0;
  int origin_y = 0;
};

// Draws a training patch: with probability 0.5 a random crop of one photo,
// otherwise a random-weight blend of two distinct photos cropped at the same
// origin (degenerates to the single-photo branch when only one photo is
// given). The diffuse prior is cropped at the same origin. Deterministic for
// a given rng state.
PatchSample sample_training_patch(const std::vector<LinearImage>& photos,
                                  const LinearImage& guessed_diffuse, int patch_size,
                                  Rng& rng);

}  // namespace svbrdf
