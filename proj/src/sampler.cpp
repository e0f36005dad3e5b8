#include "svbrdf/sampler.hpp"

#include "svbrdf/common.hpp"

namespace svbrdf {

PatchSample sample_training_patch(const std::vector<LinearImage>& photos,
                                  const LinearImage& guessed_diffuse, int patch_size,
                                  Rng& rng) {
  SVBRDF_REQUIRE(!photos.empty(), "patch sampler needs at least one photo");
  const LinearImage& ref = photos.front();
  for (const auto& p : photos)
    SVBRDF_REQUIRE(p.same_shape(ref), "patch sampler: photos are not co-registered");
  SVBRDF_REQUIRE(guessed_diffuse.width == ref.width && guessed_diffuse.height == ref.height,
                 "patch sampler: prior is not co-registered with the photos");
  SVBRDF_REQUIRE(patch_size > 0 && patch_size <= ref.width && patch_size <= ref.height,
                 "patch size larger than image");

  // Fixed draw order: branch, origin, photo indices, blend weight.
  const bool use_blend = rng.uniform() < 0.5 && photos.size() >= 2;
  const int ox = static_cast<int>(rng.uniform_int(ref.width - patch_size + 1));
  const int oy = static_cast<int>(rng.uniform_int(ref.height - patch_size + 1));

  PatchSample sample;
  sample.origin_x = ox;
  sample.origin_y = oy;
  if (!use_blend) {
    const auto idx = rng.uniform_int(photos.size());
    sample.photo_patch = crop(photos[idx], ox, oy, patch_size);
  } else {
    const auto ia = rng.uniform_int(photos.size());
    auto ib = rng.uniform_int(photos.size() - 1);
    if (ib >= ia) ++ib;  // distinct second index
    const float w = rng.uniform_f();
    sample.photo_patch =
        blend(crop(photos[ia], ox, oy, patch_size), crop(photos[ib], ox, oy, patch_size), w);
  }
  sample.diffuse_patch = crop(guessed_diffuse, ox, oy, patch_size);
  return sample;
}

}  // namespace svbrdf
