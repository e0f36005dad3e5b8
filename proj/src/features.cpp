#include "svbrdf/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "svbrdf/common.hpp"
#include "svbrdf/parallel.hpp"

namespace svbrdf {

namespace {

struct FloatPlane {
  int width = 0, height = 0;
  std::vector<float> data;
  FloatPlane(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0.f) {}
  float& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  float at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  float at_clamped(int x, int y) const {
    x = std::clamp(x, 0, width - 1);
    y = std::clamp(y, 0, height - 1);
    return at(x, y);
  }
};

// Separable binomial blur, approximates a Gaussian with sigma ~1.5.
FloatPlane smooth(const FloatPlane& src) {
  static constexpr float kKernel[7] = {1.f / 64, 6.f / 64, 15.f / 64, 20.f / 64,
                                       15.f / 64, 6.f / 64, 1.f / 64};
  FloatPlane tmp(src.width, src.height);
  parallel_for(src.height, [&](std::int64_t y) {
    for (int x = 0; x < src.width; ++x) {
      float s = 0.f;
      for (int t = -3; t <= 3; ++t) s += kKernel[t + 3] * src.at_clamped(x + t, static_cast<int>(y));
      tmp.at(x, static_cast<int>(y)) = s;
    }
  });
  FloatPlane out(src.width, src.height);
  parallel_for(src.height, [&](std::int64_t y) {
    for (int x = 0; x < src.width; ++x) {
      float s = 0.f;
      for (int t = -3; t <= 3; ++t) s += kKernel[t + 3] * tmp.at_clamped(x, static_cast<int>(y) + t);
      out.at(x, static_cast<int>(y)) = s;
    }
  });
  return out;
}

float bilinear(const FloatPlane& p, float x, float y) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const float fx = x - x0;
  const float fy = y - y0;
  const float v00 = p.at_clamped(x0, y0);
  const float v10 = p.at_clamped(x0 + 1, y0);
  const float v01 = p.at_clamped(x0, y0 + 1);
  const float v11 = p.at_clamped(x0 + 1, y0 + 1);
  return (1 - fy) * ((1 - fx) * v00 + fx * v10) + fy * ((1 - fx) * v01 + fx * v11);
}

}  // namespace

std::vector<Feature> detect_features(const LinearImage& img, const FeatureParams& params) {
  const LinearImage lum = to_luminance(img);
  FloatPlane intensity(img.width, img.height);
  intensity.data = lum.data;

  const int w = img.width;
  const int h = img.height;
  FloatPlane gxx(w, h), gyy(w, h), gxy(w, h);
  parallel_for(h, [&](std::int64_t yy) {
    const int y = static_cast<int>(yy);
    for (int x = 0; x < w; ++x) {
      // Sobel gradients on the clamped border
      const float gx = intensity.at_clamped(x + 1, y - 1) - intensity.at_clamped(x - 1, y - 1) +
                       2.f * (intensity.at_clamped(x + 1, y) - intensity.at_clamped(x - 1, y)) +
                       intensity.at_clamped(x + 1, y + 1) - intensity.at_clamped(x - 1, y + 1);
      const float gy = intensity.at_clamped(x - 1, y + 1) - intensity.at_clamped(x - 1, y - 1) +
                       2.f * (intensity.at_clamped(x, y + 1) - intensity.at_clamped(x, y - 1)) +
                       intensity.at_clamped(x + 1, y + 1) - intensity.at_clamped(x + 1, y - 1);
      gxx.at(x, y) = gx * gx;
      gyy.at(x, y) = gy * gy;
      gxy.at(x, y) = gx * gy;
    }
  });
  const FloatPlane sxx = smooth(gxx), syy = smooth(gyy), sxy = smooth(gxy);

  FloatPlane response(w, h);
  float max_response = 0.f;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const float a = sxx.at(x, y), b = sxy.at(x, y), c = syy.at(x, y);
      const float det = a * c - b * b;
      const float tr = a + c;
      const float r = det - params.harris_k * tr * tr;
      response.at(x, y) = r;
      max_response = std::max(max_response, r);
    }
  }
  if (max_response <= 0.f) return {};
  const float threshold = params.rel_threshold * max_response;

  // Keypoints need the full descriptor window inside the image.
  const int margin = params.descriptor_step * 4 + 2;
  struct Candidate {
    float score, x, y;
  };
  std::vector<Candidate> candidates;
  const int r = params.nms_radius;
  for (int y = margin; y < h - margin; ++y) {
    for (int x = margin; x < w - margin; ++x) {
      const float v = response.at(x, y);
      if (v < threshold) continue;
      bool is_max = true;
      for (int dy = -r; dy <= r && is_max; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          if (dx == 0 && dy == 0) continue;
          if (response.at_clamped(x + dx, y + dy) > v) {
            is_max = false;
            break;
          }
        }
      if (!is_max) continue;
      // Sub-pixel peak by independent quadratic fits along x and y.
      float sx = 0.f, sy = 0.f;
      const float dxm = response.at_clamped(x - 1, y), dxp = response.at_clamped(x + 1, y);
      const float dym = response.at_clamped(x, y - 1), dyp = response.at_clamped(x, y + 1);
      const float denx = dxm - 2 * v + dxp;
      const float deny = dym - 2 * v + dyp;
      if (std::fabs(denx) > 1e-12f) sx = std::clamp(0.5f * (dxm - dxp) / denx, -0.5f, 0.5f);
      if (std::fabs(deny) > 1e-12f) sy = std::clamp(0.5f * (dym - dyp) / deny, -0.5f, 0.5f);
      candidates.push_back({v, x + sx, y + sy});
    }
  }
  // Strongest first; position tiebreak keeps the order deterministic.
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });
  if (static_cast<int>(candidates.size()) > params.max_features)
    candidates.resize(params.max_features);

  std::vector<Feature> features;
  features.reserve(candidates.size());
  for (const auto& cand : candidates) {
    Feature f;
    f.x = cand.x;
    f.y = cand.y;
    // 8x8 grid of bilinear taps centered on the keypoint.
    const float step = static_cast<float>(params.descriptor_step);
    float mean = 0.f;
    for (int iy = 0; iy < 8; ++iy)
      for (int ix = 0; ix < 8; ++ix) {
        const float sxp = cand.x + (ix - 3.5f) * step;
        const float syp = cand.y + (iy - 3.5f) * step;
        const float val = bilinear(intensity, sxp, syp);
        f.descriptor[iy * 8 + ix] = val;
        mean += val;
      }
    mean /= kDescriptorSize;
    float norm_sq = 0.f;
    for (auto& d : f.descriptor) {
      d -= mean;
      norm_sq += d * d;
    }
    if (norm_sq < 1e-10f) continue;  // flat window, not a usable corner
    const float inv_norm = 1.f / std::sqrt(norm_sq);
    for (auto& d : f.descriptor) d *= inv_norm;
    features.push_back(f);
  }
  return features;
}

std::vector<std::pair<int, int>> match_features(const std::vector<Feature>& a,
                                                const std::vector<Feature>& b, float ratio) {
  SVBRDF_REQUIRE(!a.empty() && !b.empty(), "match_features: empty feature list");
  std::vector<std::pair<int, int>> matches;
  std::vector<int> best_idx(a.size(), -1);
  parallel_for(static_cast<std::int64_t>(a.size()), [&](std::int64_t i) {
    float best = std::numeric_limits<float>::max();
    float second = std::numeric_limits<float>::max();
    int best_j = -1;
    for (std::size_t j = 0; j < b.size(); ++j) {
      float dist_sq = 0.f;
      for (int d = 0; d < kDescriptorSize; ++d) {
        const float diff = a[i].descriptor[d] - b[j].descriptor[d];
        dist_sq += diff * diff;
      }
      if (dist_sq < best) {
        second = best;
        best = dist_sq;
        best_j = static_cast<int>(j);
      } else if (dist_sq < second) {
        second = dist_sq;
      }
    }
    // Ratio test on distances (squared ratio on squared distances). Strict
    // comparison so duplicated descriptors in b (ratio exactly 1) reject.
    if (best_j >= 0 && (b.size() < 2 || best < ratio * ratio * second))
      best_idx[i] = best_j;
  });
  for (std::size_t i = 0; i < a.size(); ++i)
    if (best_idx[i] >= 0) matches.emplace_back(static_cast<int>(i), best_idx[i]);
  return matches;
}

}  // namespace svbrdf
