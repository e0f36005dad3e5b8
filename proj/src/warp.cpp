#include "svbrdf/warp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "svbrdf/common.hpp"
#include "svbrdf/features.hpp"
#include "svbrdf/parallel.hpp"

namespace svbrdf {

MaskedImage MaskedImage::fully_valid(LinearImage img) {
  MaskedImage out;
  out.valid.assign(img.pixel_count(), 1);
  out.image = std::move(img);
  return out;
}

MaskedImage warp_to_reference(const LinearImage& img, const Homography& h, int out_width,
                              int out_height) {
  img.validate();
  SVBRDF_REQUIRE(out_width > 0 && out_height > 0, "warp_to_reference: empty output frame");
  const Homography inv = h.inverse();

  MaskedImage out;
  out.image = LinearImage(out_width, out_height, img.channels);
  out.valid.assign(out.image.pixel_count(), 0);

  const int c = img.channels;
  parallel_for(out_height, [&](std::int64_t y) {
    for (int x = 0; x < out_width; ++x) {
      const auto [qx, qy] = inv.apply(static_cast<double>(x), static_cast<double>(y));
      // Validity uses the continuous source rectangle, so edge pixels that
      // land exactly on the border still count.
      if (!(qx >= 0.0 && qx <= img.width - 1.0 && qy >= 0.0 && qy <= img.height - 1.0)) continue;
      const int x0 = std::min(static_cast<int>(qx), img.width - 2 >= 0 ? img.width - 2 : 0);
      const int y0 = std::min(static_cast<int>(qy), img.height - 2 >= 0 ? img.height - 2 : 0);
      const float fx = static_cast<float>(qx - x0);
      const float fy = static_cast<float>(qy - y0);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const int y1 = std::min(y0 + 1, img.height - 1);
      float* dst = &out.image.at(x, static_cast<int>(y), 0);
      for (int k = 0; k < c; ++k) {
        const float v00 = img.at(x0, y0, k);
        const float v10 = img.at(x1, y0, k);
        const float v01 = img.at(x0, y1, k);
        const float v11 = img.at(x1, y1, k);
        dst[k] = (1 - fy) * ((1 - fx) * v00 + fx * v10) + fy * ((1 - fx) * v01 + fx * v11);
      }
      out.valid[static_cast<std::size_t>(y) * out_width + x] = 1;
    }
  });
  return out;
}

namespace {

// Median luminance over valid pixels; 0 if the mask is empty.
float masked_median_luminance(const MaskedImage& m) {
  std::vector<float> lum;
  lum.reserve(m.image.pixel_count());
  const LinearImage y = to_luminance(m.image);
  for (std::size_t i = 0; i < m.valid.size(); ++i)
    if (m.valid[i]) lum.push_back(y.data[i]);
  if (lum.empty()) return 0.0f;
  const std::size_t mid = lum.size() / 2;
  std::nth_element(lum.begin(), lum.begin() + mid, lum.end());
  float hi = lum[mid];
  if (lum.size() % 2 == 0) {
    // Even count: mean of the two central order statistics.
    const float lo = *std::max_element(lum.begin(), lum.begin() + mid);
    return 0.5f * (lo + hi);
  }
  return hi;
}

}  // namespace

LinearImage min_composite(const std::vector<MaskedImage>& images, bool exposure_normalize) {
  SVBRDF_REQUIRE(!images.empty(), "min_composite: no images");
  const LinearImage& ref = images[0].image;
  ref.validate();
  for (const auto& m : images) {
    SVBRDF_REQUIRE(m.image.same_shape(ref), "min_composite: shape mismatch");
    SVBRDF_REQUIRE(m.valid.size() == ref.pixel_count(), "min_composite: mask size mismatch");
  }
  for (std::uint8_t v : images[0].valid)
    SVBRDF_REQUIRE(v != 0, "min_composite: reference image must be fully valid");

  std::vector<float> gain(images.size(), 1.0f);
  if (exposure_normalize && images.size() > 1) {
    const float ref_med = masked_median_luminance(images[0]);
    for (std::size_t i = 1; i < images.size(); ++i) {
      const float med = masked_median_luminance(images[i]);
      gain[i] = med > 1e-12f ? ref_med / med : 1.0f;
    }
  }

  LinearImage out = ref;  // reference is everywhere valid, so it seeds the min
  const int c = ref.channels;
  const std::int64_t n = static_cast<std::int64_t>(ref.pixel_count());
  parallel_for(n, [&](std::int64_t p) {
    for (std::size_t i = 1; i < images.size(); ++i) {
      if (!images[i].valid[static_cast<std::size_t>(p)]) continue;
      const float g = gain[i];
      for (int k = 0; k < c; ++k) {
        const float v = images[i].image.data[static_cast<std::size_t>(p) * c + k] * g;
        float& dst = out.data[static_cast<std::size_t>(p) * c + k];
        dst = std::min(dst, v);
      }
    }
  });
  return out;
}

ExtractResult extract_guessed_diffuse(const std::vector<LinearImage>& photos,
                                      const ExtractParams& params) {
  SVBRDF_REQUIRE(!photos.empty(), "extract_guessed_diffuse: no photos");
  const LinearImage& ref = photos[0];
  ref.validate();

  ExtractResult result;
  result.homographies.assign(photos.size(), Homography::identity());

  std::vector<MaskedImage> aligned;
  aligned.push_back(MaskedImage::fully_valid(ref));

  if (params.prealigned) {
    for (std::size_t i = 1; i < photos.size(); ++i) {
      SVBRDF_REQUIRE(photos[i].same_shape(ref), "prealigned photos must share the reference shape");
      aligned.push_back(MaskedImage::fully_valid(photos[i]));
    }
    result.guessed_diffuse = min_composite(aligned, params.exposure_normalize);
    return result;
  }

  FeatureParams fp;
  const std::vector<Feature> ref_features = detect_features(ref, fp);
  log_debug("reference: " + std::to_string(ref_features.size()) + " features");

  for (std::size_t i = 1; i < photos.size(); ++i) {
    photos[i].validate();
    bool ok = false;
    try {
      const std::vector<Feature> feats = detect_features(photos[i], fp);
      const auto matches = match_features(feats, ref_features, params.match_ratio);
      log_debug("photo " + std::to_string(i) + ": " + std::to_string(feats.size()) +
                " features, " + std::to_string(matches.size()) + " matches");
      if (static_cast<int>(matches.size()) >= std::max(4, params.min_inliers)) {
        std::vector<Correspondence> pairs;
        pairs.reserve(matches.size());
        for (const auto& [ia, ib] : matches) {
          pairs.push_back({feats[ia].x, feats[ia].y, ref_features[ib].x, ref_features[ib].y});
        }
        Rng rng = Rng::substream(params.seed, static_cast<std::uint64_t>(i));
        RansacResult rr = estimate_homography_ransac(pairs, params.ransac_px, params.ransac_iters, rng);
        const int inliers = static_cast<int>(rr.inliers.size());
        log_debug("photo " + std::to_string(i) + ": " + std::to_string(inliers) + " inliers");
        if (inliers >= params.min_inliers) {
          result.homographies[i] = rr.h;
          aligned.push_back(warp_to_reference(photos[i], rr.h, ref.width, ref.height));
          ok = true;
        }
      }
    } catch (const NumericError&) {
      ok = false;  // degenerate geometry; fall through to the exclusion path
    }
    if (!ok) {
      log_warn("photo " + std::to_string(i) + " could not be aligned; excluding it");
      result.excluded.push_back(static_cast<int>(i));
    }
  }

  result.guessed_diffuse = min_composite(aligned, params.exposure_normalize);
  return result;
}

}  // namespace svbrdf
